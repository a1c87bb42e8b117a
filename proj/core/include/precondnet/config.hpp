#ifndef PRECONDNET_CONFIG_HPP
#define PRECONDNET_CONFIG_HPP

#include <cstdlib>

namespace precondnet {

/// Upper bound on the size of dense spectral workspaces (SVD, dense Cholesky,
/// column probing of implicit operators). Defaults to 4096; the environment
/// variable PRECONDNET_DENSE_CAP overrides it.
inline int dense_cap() {
    static const int cap = [] {
        if (const char* env = std::getenv("PRECONDNET_DENSE_CAP")) {
            long v = std::strtol(env, nullptr, 10);
            if (v > 0) return static_cast<int>(v);
        }
        return 4096;
    }();
    return cap;
}

} // namespace precondnet

#endif
