#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "fres/errors.hpp"

namespace fres::hilbert {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Tensor-product factorisation of a Hilbert space: factor 0 is the slowest
/// index (leftmost in Kronecker products). Factors are at least 2-dimensional.
struct SpaceLayout {
    std::vector<int> factor_dims;

    SpaceLayout() = default;
    explicit SpaceLayout(std::vector<int> dims);

    int dim() const;
    int factors() const { return static_cast<int>(factor_dims.size()); }

    bool operator==(const SpaceLayout& other) const { return factor_dims == other.factor_dims; }
    bool operator!=(const SpaceLayout& other) const { return !(*this == other); }
};

/// Dense operator tagged with its tensor-product layout. Rates and times are
/// expressed in units of the emitter decay rate throughout.
struct Operator {
    SpaceLayout layout;
    Matrix mat;

    Operator() = default;
    Operator(SpaceLayout lay, Matrix m);

    int dim() const { return static_cast<int>(mat.rows()); }
    Operator adjoint() const { return {layout, mat.adjoint()}; }
};

Operator operator*(const Operator& a, const Operator& b);
Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(Complex scalar, const Operator& a);

/// Identity on the whole layout.
Operator identity(const SpaceLayout& layout);

/// Two-level lowering operator sigma, sigma|1> = |0>, sigma^2 = 0.
Operator annihilation_tls();

/// Truncated bosonic lowering operator on n_max+1 levels, entries sqrt(n) on
/// the first subdiagonal. n_max >= 1.
Operator annihilation_boson(int n_max);

/// Embed `op` acting on factor `factor_index` of `layout`, identity elsewhere.
Operator embed(const Operator& op, int factor_index, const SpaceLayout& layout);

Matrix kron(const Matrix& a, const Matrix& b);

/// e^A by scaling-and-squaring. Throws NumericsError on non-finite input.
Matrix matrix_exponential(const Matrix& a);

/// e^A v. Precompute matrix_exponential(A) directly when A is reused.
Vector matrix_exponential_action(const Operator& a, const Vector& v);

/// <psi| M |psi>, real part (M is expected Hermitian at call sites).
double real_expectation(const Matrix& m, const Vector& psi);

// ---------------------------------------------------------------------------
// Superoperators act on column-major vectorised density matrices:
//   vec(A X B) = (B^T (x) A) vec(X).

struct Superoperator {
    SpaceLayout layout; // layout of the underlying Hilbert space (dim d); mat is d^2 x d^2
    Matrix mat;

    int hilbert_dim() const { return layout.dim(); }
};

Vector vectorize(const Matrix& rho);
Matrix unvectorize(const Vector& v, int dim);

/// Superoperator matrix of rho -> A rho B.
Matrix sop_amb(const Matrix& a, const Matrix& b);

/// i[rho, H] as a superoperator matrix.
Matrix sop_hamiltonian(const Matrix& h);

/// (1/2) L_c rho = c rho c^dag - (1/2){c^dag c, rho} as a superoperator matrix.
Matrix sop_dissipator(const Matrix& c);

/// Apply a superoperator to a density matrix.
Matrix apply(const Superoperator& sop, const Matrix& rho);

/// Reduced matrix on one factor, tracing out all the others.
Matrix partial_trace(const Matrix& rho, const SpaceLayout& layout, int keep_factor);

} // namespace fres::hilbert
