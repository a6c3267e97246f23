#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace daeic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// error taxonomy: configuration problems vs. data that violates the
// mathematical assumptions vs. numerical breakdown during a run
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateInputError : std::runtime_error {
  explicit DegenerateInputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RankDropError : std::runtime_error {
  explicit RankDropError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonRegularError : std::runtime_error {
  explicit NonRegularError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularWindowError : std::runtime_error {
  double sigma_min;
  SingularWindowError(const std::string& msg, double smin)
      : std::runtime_error(msg + " (sigma_min = " + std::to_string(smin) + ")"),
        sigma_min(smin) {}
};

struct TransferError : std::runtime_error {
  explicit TransferError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Interval {
  double a = 0.0;
  double b = 1.0;
  double length() const { return b - a; }
  bool contains(double t, double tol = 0.0) const { return t >= a - tol && t <= b + tol; }
};

// time-dependent matrix with a fixed shape
struct MatrixFunction {
  int rows = 0;
  int cols = 0;
  std::function<Matrix(double)> eval;

  MatrixFunction() = default;
  MatrixFunction(int r, int c, std::function<Matrix(double)> f)
      : rows(r), cols(c), eval(std::move(f)) {}

  Matrix operator()(double t) const {
    Matrix v = eval(t);
    if (v.rows() != rows || v.cols() != cols)
      throw DegenerateInputError("matrix function returned wrong shape");
    return v;
  }

  static MatrixFunction constant(const Matrix& value) {
    return MatrixFunction(static_cast<int>(value.rows()), static_cast<int>(value.cols()),
                          [value](double) { return value; });
  }
};

using VectorFunction = std::function<Vector(double)>;

// linear DAE in standard pair form E(t)x' + F(t)x = q(t) with the leading
// term concentrated in the first k components: E = A*D, D = [I_k 0]
struct DaePair {
  MatrixFunction E;
  MatrixFunction F;
  int m = 0;  // state dimension
  int k = 0;  // number of differentiated components
  Interval interval;
};

// builds the pair from the properly stated form A(t)(Dx)' + B(t)x = q(t)
inline DaePair standard_form(const MatrixFunction& A, const MatrixFunction& B,
                             int k, Interval interval) {
  const int m = B.rows;
  if (B.cols != m) throw ConfigError("standard_form: B must be square");
  if (A.rows != m || A.cols != k) throw ConfigError("standard_form: A must be m x k");
  if (k < 0 || k > m) throw ConfigError("standard_form: need 0 <= k <= m");
  MatrixFunction E(m, m, [A, m, k](double t) {
    Matrix e = Matrix::Zero(m, m);
    e.leftCols(k) = A(t);
    return e;
  });
  return DaePair{E, B, m, k, interval};
}

// matrix samples on a fixed node set (one matrix per node, same shape)
struct SampledMatrixStack {
  std::vector<double> nodes;
  std::vector<Matrix> values;

  int size() const { return static_cast<int>(nodes.size()); }
  int rows() const { return values.empty() ? 0 : static_cast<int>(values.front().rows()); }
  int cols() const { return values.empty() ? 0 : static_cast<int>(values.front().cols()); }
};

inline SampledMatrixStack sample(const MatrixFunction& f, const std::vector<double>& nodes) {
  SampledMatrixStack s;
  s.nodes = nodes;
  s.values.reserve(nodes.size());
  for (double t : nodes) s.values.push_back(f(t));
  return s;
}

// right-hand side consistent with a prescribed solution:
// q(t) = E(t) x'(t) + F(t) x(t)
inline VectorFunction manufacture_rhs(const DaePair& pair, VectorFunction x,
                                      VectorFunction dx) {
  return [pair, x, dx](double t) -> Vector {
    return pair.E(t) * dx(t) + pair.F(t) * x(t);
  };
}

}  // namespace daeic
