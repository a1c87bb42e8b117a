#ifndef PRECONDNET_SPECTRAL_HPP
#define PRECONDNET_SPECTRAL_HPP

#include <vector>

#include "precondnet/dense.hpp"

namespace precondnet {

/// Extreme singular triplets of a square matrix. kappa() is the 2-norm
/// condition number sigma_max / sigma_min.
struct SpectralInfo {
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    std::vector<double> u_max, v_max; // left/right vectors of sigma_max
    std::vector<double> u_min, v_min; // left/right vectors of sigma_min
    /// Relative gap between the extreme singular values and their neighbors;
    /// small gaps mean the extreme triplets are numerically degenerate.
    double gap_rel = 1.0;

    double kappa() const { return sigma_max / sigma_min; }
};

/// Full SVD of a square dense matrix (size-capped), returning the extreme
/// singular triplets. Throws "numerically singular" when sigma_min falls
/// below 1e-300.
SpectralInfo condition_number(const DenseMatrix& B);

/// All eigenvalues of a symmetric matrix, ascending.
std::vector<double> sym_eigenvalues(const DenseMatrix& S);

/// Smallest eigenvalue of a symmetric matrix.
double sym_min_eigenvalue(const DenseMatrix& S);

} // namespace precondnet

#endif
