#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace kmlocal {

/// Ordered fit-functions f_j of the dependency variable.
class FitBasis {
 public:
  using Function = std::function<double(double)>;

  FitBasis(std::vector<Function> functions, std::vector<std::string> labels);

  std::size_t size() const noexcept { return functions_.size(); }
  const std::string& label(std::size_t j) const { return labels_[j]; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Writes f_j(x) into out[j]. Throws EvaluationError on a non-finite value.
  void eval_into(double x, std::span<double> out) const;

  /// Degree K when built by make_polynomial_basis.
  std::optional<int> polynomial_degree() const noexcept { return degree_; }

 private:
  friend FitBasis make_polynomial_basis(int degree);

  std::vector<Function> functions_;
  std::vector<std::string> labels_;
  std::optional<int> degree_;
};

/// (1, x, x^2, ..., x^K).
FitBasis make_polynomial_basis(int degree);

/// f(x) = (f_1(x), ..., f_Nf(x)).
std::vector<double> eval_basis(const FitBasis& basis, double x);

/// F_ij(x) = f_i(x) f_j(x); symmetric by construction.
struct FunctionMatrix {
  Eigen::MatrixXd entries;
};

FunctionMatrix function_matrix(const FitBasis& basis, double x);

/// x^k by repeated multiplication.
constexpr double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace kmlocal
