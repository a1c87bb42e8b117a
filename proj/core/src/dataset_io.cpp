#include "precondnet/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "precondnet/error.hpp"

namespace precondnet {

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

/// Line-oriented reader tracking line numbers for error messages.
class LineReader {
public:
    LineReader(std::istream& in, const std::string& origin) : in_(in), origin_(origin) {}

    /// Next line, or throws naming the section that is missing.
    std::string expect_line(const std::string& section) {
        std::string line;
        if (!std::getline(in_, line))
            throw Error(origin_ + ":" + std::to_string(line_no_ + 1) +
                        ": unexpected end of file, missing " + section);
        ++line_no_;
        return line;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw Error(origin_ + ":" + std::to_string(line_no_) + ": " + message);
    }

private:
    std::istream& in_;
    std::string origin_;
    int line_no_ = 0;
};

} // namespace

void write_dataset(const std::vector<PoissonSample>& samples, std::ostream& out) {
    out << "PMD1 " << samples.size() << "\n";
    for (std::size_t id = 0; id < samples.size(); ++id) {
        const PoissonSample& s = samples[id];
        out << "sample " << id << " " << s.grid.height << " " << s.grid.width << "\n";
        for (int r = 0; r < s.grid.height; ++r) {
            if (r > 0) out << " ";
            for (int c = 0; c < s.grid.width; ++c) out << (s.grid.solid(r, c) ? '#' : '.');
        }
        out << "\n";
        out << "matrix " << s.A.n_rows << " " << s.A.nnz() << "\n";
        for (int i = 0; i < s.A.n_rows; ++i)
            for (int k = s.A.row_ptr[i]; k < s.A.row_ptr[i + 1]; ++k)
                out << i << " " << s.A.col_idx[k] << " " << format_value(s.A.values[k])
                    << "\n";
        out << "rhs " << s.b.size() << "\n";
        for (double v : s.b) out << format_value(v) << "\n";
    }
}

std::vector<PoissonSample> read_dataset(std::istream& in, const std::string& origin) {
    LineReader reader(in, origin);

    std::istringstream header(reader.expect_line("PMD1 header"));
    std::string magic;
    long count = -1;
    header >> magic >> count;
    if (magic != "PMD1" || count < 0) reader.fail("malformed PMD1 header");

    std::vector<PoissonSample> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (long id = 0; id < count; ++id) {
        PoissonSample s;

        std::istringstream sample_line(reader.expect_line("sample header"));
        std::string tag;
        long file_id = -1;
        int height = 0, width = 0;
        sample_line >> tag >> file_id >> height >> width;
        if (tag != "sample" || file_id != id || height < 1 || width < 1)
            reader.fail("malformed sample header (expected sample " + std::to_string(id) +
                        ")");

        s.grid.height = height;
        s.grid.width = width;
        s.grid.cells.assign(static_cast<std::size_t>(height) * width, 0);
        std::istringstream rows(reader.expect_line("grid rows"));
        for (int r = 0; r < height; ++r) {
            std::string row;
            if (!(rows >> row) || static_cast<int>(row.size()) != width)
                reader.fail("grid row " + std::to_string(r) + " malformed");
            for (int c = 0; c < width; ++c) {
                if (row[static_cast<std::size_t>(c)] == '#')
                    s.grid.cells[static_cast<std::size_t>(r) * width + c] = 1;
                else if (row[static_cast<std::size_t>(c)] != '.')
                    reader.fail("grid row " + std::to_string(r) + " has invalid cell '" +
                                row.substr(static_cast<std::size_t>(c), 1) + "'");
            }
        }
        reindex(s.grid);

        std::istringstream matrix_line(reader.expect_line("matrix header"));
        long n = -1, nnz = -1;
        matrix_line >> tag >> n >> nnz;
        if (tag != "matrix" || n < 0 || nnz < 0) reader.fail("malformed matrix header");
        if (n != s.grid.n_fluid)
            reader.fail("matrix size " + std::to_string(n) + " does not match " +
                        std::to_string(s.grid.n_fluid) + " fluid cells");
        std::vector<CooEntry> entries;
        entries.reserve(static_cast<std::size_t>(nnz));
        for (long k = 0; k < nnz; ++k) {
            std::istringstream entry(reader.expect_line("matrix entry"));
            CooEntry e;
            if (!(entry >> e.row >> e.col >> e.value)) reader.fail("malformed matrix entry");
            entries.push_back(e);
        }
        s.A = csr_from_coo(entries, static_cast<int>(n), static_cast<int>(n));
        if (s.A.nnz() != static_cast<int>(nnz))
            reader.fail("matrix entries are not canonical (duplicates or zeros)");

        std::istringstream rhs_line(reader.expect_line("rhs header"));
        long rhs_n = -1;
        rhs_line >> tag >> rhs_n;
        if (tag != "rhs" || rhs_n != n) reader.fail("malformed rhs header");
        s.b.resize(static_cast<std::size_t>(rhs_n));
        for (long k = 0; k < rhs_n; ++k) {
            std::istringstream value(reader.expect_line("rhs value"));
            if (!(value >> s.b[static_cast<std::size_t>(k)])) reader.fail("malformed rhs value");
        }

        samples.push_back(std::move(s));
    }
    return samples;
}

void save_dataset(const std::vector<PoissonSample>& samples, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // binary: keep LF endings everywhere
    if (!out) throw Error("save_dataset: cannot open '" + path + "' for writing");
    write_dataset(samples, out);
    if (!out) throw Error("save_dataset: write to '" + path + "' failed");
}

std::vector<PoissonSample> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("load_dataset: cannot open '" + path + "'");
    return read_dataset(in, path);
}

} // namespace precondnet
