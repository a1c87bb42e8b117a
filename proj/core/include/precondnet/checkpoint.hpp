#ifndef PRECONDNET_CHECKPOINT_HPP
#define PRECONDNET_CHECKPOINT_HPP

#include <string>

#include "precondnet/cnn.hpp"

namespace precondnet {

/// PMC1 checkpoint format (UTF-8 text):
///   line 1: "PMC1"
///   line 2: architecture string "k=1,2,2,2,2,1 c=2,8,16,32,16,8,1"
///   per tensor: "tensor <name> <ndim> <d1> ... <dk>" followed by row-major
///   values, one per line, 17 significant digits. Kernels are conv_0..conv_5
///   with dims (out, in, k, k); PReLU slopes are 1-element tensors
///   prelu_0..prelu_4.
void save_checkpoint(const CnnParams& params, const std::string& path);
CnnParams load_checkpoint(const std::string& path);

} // namespace precondnet

#endif
