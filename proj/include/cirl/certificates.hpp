#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cirl {

// Outcome of one numerical certificate. On failure `instance` is a JSON
// object with the seed, sizes, parameters and measured values of the
// offending case.
struct Certificate {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  std::string instance;
};

struct CertificateOptions {
  std::uint64_t seed = 1;
  // Scales the lambda updates by 1 +/- p in the descent checks; used to make
  // sure the suite notices a broken update.
  double lambda_perturbation = 0.0;
};

struct CertificateReport {
  std::vector<Certificate> items;
  bool all_passed() const;
  std::string to_json() const;
};

// Adjoint and frame identities, reduction equivalence, MM descent,
// majorization, gradient and Lipschitz checks, estimator optimality and the
// log-sum to l0 gap.
CertificateReport run_certificates(const CertificateOptions& opt);

}  // namespace cirl
