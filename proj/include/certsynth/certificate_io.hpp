#pragma once

#include <optional>
#include <string>

#include "certsynth/config.hpp"

namespace certsynth {

/// A certificate file: the problem it certifies plus the rounded symbolic
/// functions and levels. Networks live in a sidecar next to it.
struct CertificateRecord {
  std::string name;
  int benchmark_id = 0;
  PropertyProblem problem;
  SymbolicCertificate certificate;
  std::uint64_t seed = 0;
};

/// YAML text of a certificate file. Numbers are printed round-trip exact.
std::string certificate_to_yaml(const CertificateRecord& r);
CertificateRecord certificate_from_yaml(const std::string& text);

/// YAML sidecar with layer sizes, activations, structural flags and the
/// effective weights of each network.
std::string networks_to_yaml(const Candidates& c);
Candidates networks_from_yaml(const std::string& text);

/// Writes `<stem>.cert.yaml` and, when networks are given,
/// `<stem>.net.yaml`. Returns the certificate path.
std::string write_certificate(const std::string& stem, const CertificateRecord& r, const Candidates* networks);
CertificateRecord read_certificate(const std::string& path);

}  // namespace certsynth
