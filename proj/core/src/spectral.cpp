#include "precondnet/spectral.hpp"

#include <Eigen/Dense>
#include <string>

#include "precondnet/config.hpp"
#include "precondnet/error.hpp"

namespace precondnet {

namespace {

using EigenMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

std::vector<double> column_of(const Eigen::MatrixXd& M, Eigen::Index j) {
    std::vector<double> v(static_cast<std::size_t>(M.rows()));
    for (Eigen::Index i = 0; i < M.rows(); ++i) v[static_cast<std::size_t>(i)] = M(i, j);
    return v;
}

} // namespace

SpectralInfo condition_number(const DenseMatrix& B) {
    const int n = B.n_rows;
    if (B.n_cols != n) throw Error("condition_number: matrix must be square");
    if (n > dense_cap())
        throw Error("condition_number: size " + std::to_string(n) +
                    " exceeds dense workspace cap " + std::to_string(dense_cap()));

    const EigenMap M(B.values.data(), n, n);

    Eigen::MatrixXd U, V;
    Eigen::VectorXd sigma;
    // Jacobi SVD for small matrices (best accuracy), divide-and-conquer above.
    if (n <= 128) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
        U = svd.matrixU();
        V = svd.matrixV();
        sigma = svd.singularValues();
    } else {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
        U = svd.matrixU();
        V = svd.matrixV();
        sigma = svd.singularValues();
    }

    SpectralInfo info;
    info.sigma_max = sigma(0);
    info.sigma_min = sigma(n - 1);
    if (info.sigma_min < 1e-300)
        throw Error("condition_number: numerically singular (sigma_min = " +
                    std::to_string(info.sigma_min) + ")");
    info.u_max = column_of(U, 0);
    info.v_max = column_of(V, 0);
    info.u_min = column_of(U, n - 1);
    info.v_min = column_of(V, n - 1);
    if (n > 1) {
        const double gap_top = (sigma(0) - sigma(1)) / sigma(0);
        const double gap_bot = (sigma(n - 2) - sigma(n - 1)) / sigma(0);
        info.gap_rel = std::min(gap_top, gap_bot);
    }
    return info;
}

std::vector<double> sym_eigenvalues(const DenseMatrix& S) {
    const int n = S.n_rows;
    if (S.n_cols != n) throw Error("sym_eigenvalues: matrix must be square");
    if (n > dense_cap())
        throw Error("sym_eigenvalues: size " + std::to_string(n) +
                    " exceeds dense workspace cap " + std::to_string(dense_cap()));
    const EigenMap M(S.values.data(), n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
    std::vector<double> lambda(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) lambda[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
    return lambda;
}

double sym_min_eigenvalue(const DenseMatrix& S) { return sym_eigenvalues(S).front(); }

} // namespace precondnet
