#ifndef PRECONDNET_DATASET_IO_HPP
#define PRECONDNET_DATASET_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "precondnet/poisson.hpp"

namespace precondnet {

/// PMD1 dataset format (UTF-8 text, LF line endings):
///   line 1: "PMD1 <sample_count>"
///   per sample:
///     "sample <id> <height> <width>"
///     one line of <height> strings of '.'/'#' (fluid/solid), row-major
///     "matrix <n> <nnz>" followed by nnz lines "<i> <j> <value>"
///     "rhs <n>" followed by n lines of values
/// Values are printed with 17 significant digits, so doubles round-trip
/// losslessly.
void save_dataset(const std::vector<PoissonSample>& samples, const std::string& path);
std::vector<PoissonSample> load_dataset(const std::string& path);

void write_dataset(const std::vector<PoissonSample>& samples, std::ostream& out);
std::vector<PoissonSample> read_dataset(std::istream& in, const std::string& origin);

/// Canonical 17-significant-digit rendering used by all text formats.
std::string format_value(double v);

} // namespace precondnet

#endif
