#include "fwrnn/params.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fwrnn {

namespace {

constexpr char kMagic[8] = {'F', 'W', 'C', 'K', 'P', 'T', '1', '\0'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& os, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64(os, bits);
}

double read_f64(std::istream& is) {
    const std::uint64_t bits = read_u64(is);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

}  // namespace

void ParamSet::add(std::string name, Matrix m) {
    if (has(name)) throw std::invalid_argument("ParamSet: duplicate name " + name);
    entries_.emplace_back(std::move(name), std::move(m));
}

bool ParamSet::has(const std::string& name) const {
    for (const auto& [n, m] : entries_)
        if (n == name) return true;
    return false;
}

Matrix& ParamSet::get(const std::string& name) {
    for (auto& [n, m] : entries_)
        if (n == name) return m;
    throw std::out_of_range("ParamSet: no parameter named " + name);
}

const Matrix& ParamSet::get(const std::string& name) const {
    for (const auto& [n, m] : entries_)
        if (n == name) return m;
    throw std::out_of_range("ParamSet: no parameter named " + name);
}

std::size_t ParamSet::flat_size() const {
    std::size_t s = 0;
    for (const auto& [n, m] : entries_) s += m.size();
    return s;
}

Vector ParamSet::flatten() const {
    Vector flat;
    flat.reserve(flat_size());
    for (const auto& [n, m] : entries_)
        flat.insert(flat.end(), m.raw().begin(), m.raw().end());
    return flat;
}

void ParamSet::set_from_flat(const Vector& flat) {
    if (flat.size() != flat_size())
        throw std::invalid_argument("ParamSet: flat size mismatch");
    std::size_t off = 0;
    for (auto& [n, m] : entries_) {
        std::copy(flat.begin() + off, flat.begin() + off + m.size(),
                  m.raw().begin());
        off += m.size();
    }
}

void ParamSet::add_flat(double alpha, const Vector& flat) {
    if (flat.size() != flat_size())
        throw std::invalid_argument("ParamSet: flat size mismatch");
    std::size_t off = 0;
    for (auto& [n, m] : entries_) {
        for (std::size_t i = 0; i < m.size(); ++i)
            m.raw()[i] += alpha * flat[off + i];
        off += m.size();
    }
}

ParamSet ParamSet::zeros_like() const {
    ParamSet z;
    for (const auto& [n, m] : entries_) z.add(n, Matrix(m.rows(), m.cols()));
    return z;
}

bool ParamSet::all_finite() const {
    for (const auto& [n, m] : entries_)
        if (!m.all_finite()) return false;
    return true;
}

void ParamSet::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
    os.write(kMagic, 8);
    write_u64(os, entries_.size());
    for (const auto& [n, m] : entries_) {
        write_u64(os, n.size());
        os.write(n.data(), static_cast<std::streamsize>(n.size()));
        write_u64(os, m.rows());
        write_u64(os, m.cols());
    }
    for (const auto& [n, m] : entries_)
        for (double d : m.raw()) write_f64(os, d);
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

ParamSet ParamSet::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const std::uint64_t count = read_u64(is);
    struct Header {
        std::string name;
        std::uint64_t rows, cols;
    };
    std::vector<Header> headers(count);
    for (auto& h : headers) {
        const std::uint64_t len = read_u64(is);
        h.name.resize(len);
        is.read(h.name.data(), static_cast<std::streamsize>(len));
        h.rows = read_u64(is);
        h.cols = read_u64(is);
        if (!is) throw std::runtime_error("checkpoint: truncated header");
    }
    ParamSet ps;
    for (const auto& h : headers) {
        Matrix m(h.rows, h.cols);
        for (double& d : m.raw()) d = read_f64(is);
        ps.add(h.name, std::move(m));
    }
    return ps;
}

void ParamSet::dump_text(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
    for (const auto& [n, m] : entries_) {
        os << n << " " << m.rows() << " " << m.cols() << "\n";
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
                os << (c ? " " : "") << buf;
            }
            os << "\n";
        }
    }
}

}  // namespace fwrnn
