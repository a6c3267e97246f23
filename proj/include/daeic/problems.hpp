#pragma once

#include <cmath>
#include <string>

#include "daeic/matrix_function.hpp"

namespace daeic {

// benchmark problem with everything needed for analysis and IVP runs
struct ProblemBundle {
  std::string name;
  DaePair pair;            // coefficients valid on pair.interval
  Interval solve_interval; // where IVPs are run
  VectorFunction q;        // consistent right-hand side
  VectorFunction exact;    // solution matching q
  VectorFunction dexact;   // its derivative
  MatrixFunction G_exact;  // reference accurate condition matrix
  Matrix G_a;              // initial condition used for IVPs
  Vector g_a;
  int expected_mu = 0;
  int expected_dof = 0;
};

// Linearized Campbell-Moore problem: size 7, six differentiated components,
// index 3 with four degrees of freedom.
inline ProblemBundle campbell_moore(double rho = 5.0) {
  const int m = 7, k = 6;
  MatrixFunction A(m, k, [](double) {
    Matrix a = Matrix::Zero(7, 6);
    a.topRows(6).setIdentity();
    return a;
  });
  MatrixFunction B(m, m, [rho](double t) {
    const double s = std::sin(t), c = std::cos(t);
    Matrix b = Matrix::Zero(7, 7);
    b(0, 3) = -1.0;
    b(1, 4) = -1.0;
    b(2, 5) = -1.0;
    b(3, 2) = s;  b(3, 4) = 1.0;  b(3, 5) = -c;  b(3, 6) = -2.0 * rho * c * c;
    b(4, 2) = -c; b(4, 3) = -1.0; b(4, 5) = -s;  b(4, 6) = -2.0 * rho * s * c;
    b(5, 2) = 1.0; b(5, 6) = 2.0 * rho * s;
    b(6, 0) = 2.0 * rho * c * c; b(6, 1) = 2.0 * rho * s * c; b(6, 2) = -2.0 * rho * s;
    return b;
  });

  ProblemBundle p;
  p.name = "campbell-moore";
  // coefficients are entire, keep room for analysis windows around t = 0
  p.pair = standard_form(A, B, k, Interval{-10.0, 10.0});
  p.solve_interval = Interval{0.0, 5.0};

  p.exact = [rho](double t) {
    const double s = std::sin(t), c = std::cos(t);
    Vector x(7);
    x << s, c, 2.0 * c * c, c, -s, -2.0 * std::sin(2.0 * t), -s / rho;
    return x;
  };
  p.dexact = [rho](double t) {
    const double s = std::sin(t), c = std::cos(t);
    Vector x(7);
    x << c, -s, -2.0 * std::sin(2.0 * t), -s, -c, -4.0 * std::cos(2.0 * t), -c / rho;
    return x;
  };
  p.q = manufacture_rhs(p.pair, p.exact, p.dexact);

  p.G_exact = MatrixFunction(4, 7, [](double t) {
    const double s = std::sin(t), c = std::cos(t);
    Matrix H(2, 3), Afrak(3, 3), Om(3, 3), dOm(3, 3);
    H << s, -c, 0.0,
         0.0, 1.0, c;
    Afrak << 0.0, 1.0, -c,
             -1.0, 0.0, -s,
             0.0, 0.0, 0.0;
    Om << c * c * c * c, s * c * c * c, -s * c * c,
          s * c * c * c, s * s * c * c, -s * s * s * c,
          -s * c * c, -s * s * s * c, s * s;
    const double d11 = -4.0 * c * c * c * s;
    const double d12 = c * c * c * c - 3.0 * s * s * c * c;
    const double d13 = -(c * c * c - 2.0 * s * s * c);
    const double d22 = 2.0 * s * c * c * c - 2.0 * s * s * s * c;
    const double d23 = -(3.0 * s * s * c * c - s * s * s * s);
    const double d33 = 2.0 * s * c;
    dOm << d11, d12, d13,
           d12, d22, d23,
           d13, d23, d33;
    Matrix G = Matrix::Zero(4, 7);
    G.block(0, 0, 2, 3) = H;
    G.block(2, 0, 2, 3) = H * (Afrak + dOm) * Om;
    G.block(2, 3, 2, 3) = H;
    return G;
  });

  p.G_a = Matrix::Zero(4, 7);
  p.G_a << 0, -1, 0, 0, 0, 0, 0,
           0, 1, 1, 0, 0, 0, 0,
           0, 0, 0, 0, -1, 0, 0,
          -1, 0, 0, 0, 1, 1, 0;
  p.g_a = Vector(4);
  p.g_a << -1.0, 3.0, 0.0, 0.0;
  p.expected_mu = 3;
  p.expected_dof = 4;
  return p;
}

enum class ChuaCase { Index1, Index2, Index3 };

// Chua circuit with current-controlled resistors: size 5, three
// differentiated components; the index depends on the coefficient choice.
inline ProblemBundle chua_riaza(ChuaCase which) {
  auto C1 = [](double t) { return std::sin(t) + 2.0; };
  auto dC1 = [](double t) { return std::cos(t); };
  const bool flipC2 = (which == ChuaCase::Index3);
  auto C2 = [flipC2](double t) {
    return flipC2 ? -(std::sin(t) + 2.0) : std::cos(t) + 2.0;
  };
  auto dC2 = [flipC2](double t) { return flipC2 ? -std::cos(t) : -std::sin(t); };
  auto Lf = [](double t) { return t * t + 1.0; };
  auto dL = [](double t) { return 2.0 * t; };
  const bool zeroR1 = (which != ChuaCase::Index1);
  auto R1 = [zeroR1](double t) { return zeroR1 ? 0.0 : 0.5 * std::sin(2.0 * t) + 1.0; };
  auto R2 = [](double t) { return std::sin(t) + std::cos(t) + 2.0; };

  const int m = 5, k = 3;
  MatrixFunction A(m, k, [C1, C2, Lf](double t) {
    Matrix a = Matrix::Zero(5, 3);
    a(0, 0) = C1(t);
    a(1, 1) = C2(t);
    a(2, 2) = Lf(t);
    return a;
  });
  MatrixFunction B(m, m, [dC1, dC2, dL, R1, R2](double t) {
    Matrix b = Matrix::Zero(5, 5);
    b(0, 0) = dC1(t); b(0, 3) = -1.0; b(0, 4) = 1.0;
    b(1, 1) = dC2(t); b(1, 2) = 1.0; b(1, 3) = 1.0;
    b(2, 1) = -1.0; b(2, 2) = dL(t);
    b(3, 0) = -1.0; b(3, 1) = 1.0; b(3, 3) = -R1(t);
    b(4, 0) = 1.0; b(4, 4) = -R2(t);
    return b;
  });

  ProblemBundle p;
  switch (which) {
    case ChuaCase::Index1: p.name = "chua-riaza-1"; p.expected_mu = 1; p.expected_dof = 3; break;
    case ChuaCase::Index2: p.name = "chua-riaza-2"; p.expected_mu = 2; p.expected_dof = 2; break;
    case ChuaCase::Index3: p.name = "chua-riaza-3"; p.expected_mu = 3; p.expected_dof = 1; break;
  }
  p.pair = standard_form(A, B, k, Interval{-2.0, 2.0});
  p.solve_interval = Interval{0.0, 1.0};

  // smooth manufactured solution (not required to be special in any way)
  p.exact = [](double t) {
    Vector x(5);
    x << std::sin(t), std::cos(2.0 * t), std::cos(t), std::sin(2.0 * t), std::exp(-t);
    return x;
  };
  p.dexact = [](double t) {
    Vector x(5);
    x << std::cos(t), -2.0 * std::sin(2.0 * t), -std::sin(t), 2.0 * std::cos(2.0 * t),
        -std::exp(-t);
    return x;
  };
  p.q = manufacture_rhs(p.pair, p.exact, p.dexact);

  switch (which) {
    case ChuaCase::Index1:
      p.G_exact = MatrixFunction(3, 5, [](double) {
        Matrix g = Matrix::Zero(3, 5);
        g.leftCols(3).setIdentity();
        return g;
      });
      break;
    case ChuaCase::Index2:
      p.G_exact = MatrixFunction(2, 5, [C1, C2](double t) {
        Matrix g = Matrix::Zero(2, 5);
        g(0, 0) = C1(t) / C2(t);
        g(0, 1) = 1.0;
        g(1, 2) = 1.0;
        return g;
      });
      break;
    case ChuaCase::Index3:
      p.G_exact = MatrixFunction(1, 5, [C1, Lf, R2](double t) {
        Matrix g = Matrix::Zero(1, 5);
        g(0, 0) = -1.0;
        g(0, 1) = 1.0;
        g(0, 2) = -Lf(t) / (R2(t) * C1(t));
        return g;
      });
      break;
  }
  p.G_a = p.G_exact(0.0);
  p.g_a = p.G_a * p.exact(0.0);
  return p;
}

// Constant pair in Kronecker form with nilpotent part of size 2: no degrees
// of freedom, the solution (f, f') is fully determined by the data.
inline ProblemBundle kcf_index2() {
  const int m = 2, k = 1;
  MatrixFunction A(m, k, [](double) {
    Matrix a(2, 1);
    a << 0.0, -1.0;
    return a;
  });
  MatrixFunction B = MatrixFunction::constant(Matrix::Identity(2, 2));

  ProblemBundle p;
  p.name = "kcf2";
  p.pair = standard_form(A, B, k, Interval{-2.0, 2.0});
  p.solve_interval = Interval{0.0, 1.0};
  p.exact = [](double t) {
    Vector x(2);
    x << std::sin(t), std::cos(t);
    return x;
  };
  p.dexact = [](double t) {
    Vector x(2);
    x << std::cos(t), -std::sin(t);
    return x;
  };
  p.q = manufacture_rhs(p.pair, p.exact, p.dexact);
  p.G_exact = MatrixFunction(0, 2, [](double) { return Matrix::Zero(0, 2); });
  p.G_a = Matrix::Zero(0, 2);
  p.g_a = Vector::Zero(0);
  p.expected_mu = 2;
  p.expected_dof = 0;
  return p;
}

inline ProblemBundle problem_by_name(const std::string& name) {
  if (name == "campbell-moore") return campbell_moore();
  if (name == "chua-riaza-1") return chua_riaza(ChuaCase::Index1);
  if (name == "chua-riaza-2") return chua_riaza(ChuaCase::Index2);
  if (name == "chua-riaza-3") return chua_riaza(ChuaCase::Index3);
  if (name == "kcf2") return kcf_index2();
  throw ConfigError("unknown problem '" + name + "'");
}

}  // namespace daeic
