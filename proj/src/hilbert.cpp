#include "fres/hilbert.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace fres::hilbert {

SpaceLayout::SpaceLayout(std::vector<int> dims) : factor_dims(std::move(dims)) {
    if (factor_dims.empty())
        throw ConfigError("SpaceLayout: at least one factor required");
    for (int d : factor_dims)
        if (d < 2)
            throw ConfigError("SpaceLayout: every factor must have dimension >= 2");
}

int SpaceLayout::dim() const {
    int d = 1;
    for (int f : factor_dims) d *= f;
    return d;
}

Operator::Operator(SpaceLayout lay, Matrix m) : layout(std::move(lay)), mat(std::move(m)) {
    if (mat.rows() != mat.cols())
        throw ConfigError("Operator: matrix must be square");
    if (mat.rows() != layout.dim())
        throw ConfigError("Operator: matrix dimension does not match layout");
}

static void check_same_layout(const Operator& a, const Operator& b) {
    if (a.layout != b.layout)
        throw ConfigError("Operator arithmetic: layouts differ");
}

Operator operator*(const Operator& a, const Operator& b) {
    check_same_layout(a, b);
    return {a.layout, a.mat * b.mat};
}

Operator operator+(const Operator& a, const Operator& b) {
    check_same_layout(a, b);
    return {a.layout, a.mat + b.mat};
}

Operator operator-(const Operator& a, const Operator& b) {
    check_same_layout(a, b);
    return {a.layout, a.mat - b.mat};
}

Operator operator*(Complex scalar, const Operator& a) {
    return {a.layout, scalar * a.mat};
}

Operator identity(const SpaceLayout& layout) {
    return {layout, Matrix::Identity(layout.dim(), layout.dim())};
}

Operator annihilation_tls() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0; // sigma = |0><1|
    return {SpaceLayout({2}), m};
}

Operator annihilation_boson(int n_max) {
    if (n_max < 1)
        throw ConfigError("annihilation_boson: truncation n_max must be >= 1");
    const int d = n_max + 1;
    Matrix m = Matrix::Zero(d, d);
    for (int n = 1; n < d; ++n)
        m(n - 1, n) = std::sqrt(static_cast<double>(n));
    return {SpaceLayout({d}), m};
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Operator embed(const Operator& op, int factor_index, const SpaceLayout& layout) {
    if (factor_index < 0 || factor_index >= layout.factors())
        throw ConfigError("embed: factor index out of range");
    if (op.dim() != layout.factor_dims[factor_index])
        throw ConfigError("embed: operator dimension does not match target factor");
    Matrix acc = Matrix::Identity(1, 1);
    for (int k = 0; k < layout.factors(); ++k) {
        const int fd = layout.factor_dims[k];
        if (k == factor_index)
            acc = kron(acc, op.mat);
        else
            acc = kron(acc, Matrix::Identity(fd, fd));
    }
    return {layout, std::move(acc)};
}

Matrix matrix_exponential(const Matrix& a) {
    if (!a.allFinite())
        throw NumericsError("matrix_exponential: non-finite entries");
    return a.exp();
}

Vector matrix_exponential_action(const Operator& a, const Vector& v) {
    if (v.size() != a.dim())
        throw ConfigError("matrix_exponential_action: vector dimension mismatch");
    return matrix_exponential(a.mat) * v;
}

double real_expectation(const Matrix& m, const Vector& psi) {
    return std::real(psi.dot(m * psi));
}

Vector vectorize(const Matrix& rho) {
    return Eigen::Map<const Vector>(rho.data(), rho.size());
}

Matrix unvectorize(const Vector& v, int dim) {
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix sop_amb(const Matrix& a, const Matrix& b) {
    return kron(b.transpose(), a);
}

Matrix sop_hamiltonian(const Matrix& h) {
    const Matrix id = Matrix::Identity(h.rows(), h.cols());
    // i[rho, H] = i(rho H - H rho)
    return Complex(0, 1) * (sop_amb(id, h) - sop_amb(h, id));
}

Matrix sop_dissipator(const Matrix& c) {
    const Matrix id = Matrix::Identity(c.rows(), c.cols());
    const Matrix cdc = c.adjoint() * c;
    return sop_amb(c, c.adjoint()) - 0.5 * (sop_amb(cdc, id) + sop_amb(id, cdc));
}

Matrix apply(const Superoperator& sop, const Matrix& rho) {
    return unvectorize(sop.mat * vectorize(rho), sop.hilbert_dim());
}

Matrix partial_trace(const Matrix& rho, const SpaceLayout& layout, int keep_factor) {
    if (keep_factor < 0 || keep_factor >= layout.factors())
        throw ConfigError("partial_trace: factor index out of range");
    if (rho.rows() != layout.dim())
        throw ConfigError("partial_trace: dimension does not match layout");
    const int dk = layout.factor_dims[keep_factor];
    // strides for (left, kept, right) index decomposition, factor 0 slowest
    int right = 1;
    for (int f = keep_factor + 1; f < layout.factors(); ++f) right *= layout.factor_dims[f];
    int left = 1;
    for (int f = 0; f < keep_factor; ++f) left *= layout.factor_dims[f];

    Matrix out = Matrix::Zero(dk, dk);
    for (int i = 0; i < dk; ++i)
        for (int j = 0; j < dk; ++j)
            for (int l = 0; l < left; ++l)
                for (int r = 0; r < right; ++r) {
                    const int row = (l * dk + i) * right + r;
                    const int col = (l * dk + j) * right + r;
                    out(i, j) += rho(row, col);
                }
    return out;
}

} // namespace fres::hilbert
