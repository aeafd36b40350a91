/* Compiles the public header as C and makes a few calls through it. */
#include <stdio.h>
#include <string.h>

#include "certsynth/certsynth.h"

int main(void) {
  certsynth_problem* p = NULL;
  certsynth_benchmark_info info;
  if (certsynth_benchmark_count() < 1) return 1;
  if (certsynth_benchmark_at(0, &info) != CERTSYNTH_OK || info.id != 1) return 1;
  if (certsynth_problem_from_benchmark("NoSuchSystem", &p) != CERTSYNTH_ERR_CONFIG) return 1;
  if (strstr(certsynth_last_error(), "NonPoly0") == NULL) return 1;
  if (certsynth_problem_from_benchmark("1", &p) != CERTSYNTH_OK) return 1;
  certsynth_problem_free(p);
  printf("C header ok\n");
  return 0;
}
