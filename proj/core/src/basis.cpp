#include "kmlocal/basis.hpp"

#include <cmath>

#include "kmlocal/error.hpp"

namespace kmlocal {

FitBasis::FitBasis(std::vector<Function> functions, std::vector<std::string> labels)
    : functions_(std::move(functions)), labels_(std::move(labels)) {
  if (functions_.empty()) throw DomainError("fit basis needs at least one function");
  if (functions_.size() != labels_.size()) {
    throw ShapeError("fit basis has " + std::to_string(functions_.size()) + " functions but " +
                     std::to_string(labels_.size()) + " labels");
  }
  for (std::size_t j = 0; j < functions_.size(); ++j) {
    if (!functions_[j]) throw DomainError("fit-function '" + labels_[j] + "' is empty");
  }
}

void FitBasis::eval_into(double x, std::span<double> out) const {
  if (out.size() != functions_.size()) throw ShapeError("basis output span has wrong size");
  for (std::size_t j = 0; j < functions_.size(); ++j) {
    const double v = functions_[j](x);
    if (!std::isfinite(v)) throw EvaluationError(labels_[j], x);
    out[j] = v;
  }
}

FitBasis make_polynomial_basis(int degree) {
  if (degree < 0) throw DomainError("polynomial degree must be non-negative");
  std::vector<FitBasis::Function> fns;
  std::vector<std::string> labels;
  for (int k = 0; k <= degree; ++k) {
    fns.emplace_back([k](double x) { return ipow(x, k); });
    labels.push_back(k == 0 ? "1" : k == 1 ? "x" : "x^" + std::to_string(k));
  }
  FitBasis basis(std::move(fns), std::move(labels));
  basis.degree_ = degree;
  return basis;
}

std::vector<double> eval_basis(const FitBasis& basis, double x) {
  if (!std::isfinite(x)) throw DomainError("basis argument must be finite");
  std::vector<double> out(basis.size());
  basis.eval_into(x, out);
  return out;
}

FunctionMatrix function_matrix(const FitBasis& basis, double x) {
  const auto f = eval_basis(basis, x);
  const auto n = static_cast<Eigen::Index>(f.size());
  FunctionMatrix m{Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m.entries(i, j) = f[i] * f[j];
  }
  return m;
}

}  // namespace kmlocal
