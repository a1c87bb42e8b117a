#include "precondnet/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "precondnet/dataset_io.hpp"
#include "precondnet/error.hpp"

namespace precondnet {

namespace {

std::string architecture_string() {
    std::ostringstream out;
    out << "k=";
    for (int l = 0; l < kNumLayers; ++l)
        out << (l ? "," : "") << kKernelSizes[static_cast<std::size_t>(l)];
    out << " c=";
    for (int c = 0; c <= kNumLayers; ++c)
        out << (c ? "," : "") << kChannels[static_cast<std::size_t>(c)];
    return out.str();
}

} // namespace

void save_checkpoint(const CnnParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("save_checkpoint: cannot open '" + path + "' for writing");

    out << "PMC1\n" << architecture_string() << "\n";
    for (int l = 0; l < kNumLayers; ++l) {
        const ConvKernel& k = params.kernels[static_cast<std::size_t>(l)];
        out << "tensor " << tensor_name(l) << " 4 " << k.out_ch << " " << k.in_ch << " "
            << k.ksize << " " << k.ksize << "\n";
        for (double w : k.w) out << format_value(w) << "\n";
    }
    for (int a = 0; a < kNumPrelu; ++a) {
        out << "tensor " << tensor_name(kNumLayers + a) << " 1 1\n";
        out << format_value(params.prelu[static_cast<std::size_t>(a)]) << "\n";
    }
    if (!out) throw Error("save_checkpoint: write to '" + path + "' failed");
}

CnnParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_checkpoint: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line) || line != "PMC1")
        throw Error("load_checkpoint: '" + path + "' is not a PMC1 checkpoint");
    if (!std::getline(in, line) || line != architecture_string())
        throw Error("load_checkpoint: architecture mismatch, expected '" +
                    architecture_string() + "', got '" + line + "'");

    CnnParams params = CnnParams::zeros();
    const int total = kNumLayers + kNumPrelu;
    for (int t = 0; t < total; ++t) {
        if (!std::getline(in, line))
            throw Error("load_checkpoint: missing tensor " + tensor_name(t));
        std::istringstream header(line);
        std::string tag, name;
        int ndim = 0;
        header >> tag >> name >> ndim;
        if (tag != "tensor" || name != tensor_name(t))
            throw Error("load_checkpoint: expected tensor " + tensor_name(t) +
                        ", got '" + line + "'");
        std::size_t count = 1;
        for (int d = 0; d < ndim; ++d) {
            long dim = 0;
            if (!(header >> dim) || dim < 1)
                throw Error("load_checkpoint: bad dims for tensor " + name);
            count *= static_cast<std::size_t>(dim);
        }

        std::vector<double> values(count);
        for (std::size_t i = 0; i < count; ++i) {
            if (!std::getline(in, line))
                throw Error("load_checkpoint: truncated tensor " + name);
            values[i] = std::strtod(line.c_str(), nullptr);
        }

        if (t < kNumLayers) {
            ConvKernel& k = params.kernels[static_cast<std::size_t>(t)];
            if (count != k.w.size())
                throw Error("load_checkpoint: tensor " + name + " has " +
                            std::to_string(count) + " values, expected " +
                            std::to_string(k.w.size()));
            k.w = std::move(values);
        } else {
            if (count != 1)
                throw Error("load_checkpoint: tensor " + name + " must hold 1 value");
            params.prelu[static_cast<std::size_t>(t - kNumLayers)] = values[0];
        }
    }
    return params;
}

} // namespace precondnet
