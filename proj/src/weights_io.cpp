#include "emseg/weights_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include "emseg/error.hpp"

namespace emseg {

namespace {

constexpr char kMagic[4] = {'C', 'S', 'W', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out.push_back(char((v >> (8 * b)) & 0xff));
}

void put_f64(std::string& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t take_u64(const std::string& buf, std::size_t& pos) {
    if (buf.size() - pos < 8) throw ParseError("weight bundle truncated", pos);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= std::uint64_t(std::uint8_t(buf[pos + b])) << (8 * b);
    pos += 8;
    return v;
}

double take_f64(const std::string& buf, std::size_t& pos) {
    return std::bit_cast<double>(take_u64(buf, pos));
}

}  // namespace

void save_bundle(const std::string& path, const std::vector<Matrix>& matrices) {
    std::string out(kMagic, 4);
    put_u64(out, matrices.size());
    for (const Matrix& m : matrices) {
        put_u64(out, m.rows());
        put_u64(out, m.cols());
        for (double v : m.data()) put_f64(out, v);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + path + " for writing");
    f.write(out.data(), std::streamsize(out.size()));
    if (!f) throw Error("short write to " + path);
}

std::vector<Matrix> load_bundle(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 4 || buf.compare(0, 4, kMagic, 4) != 0) {
        throw ParseError(path + ": bad weight bundle magic", 0);
    }
    std::size_t pos = 4;
    const std::uint64_t count = take_u64(buf, pos);
    if (count > (1u << 20)) throw ParseError(path + ": implausible matrix count", 4);
    std::vector<Matrix> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t rows = take_u64(buf, pos);
        const std::uint64_t cols = take_u64(buf, pos);
        const std::uint64_t cells = rows * cols;
        if (rows > (1u << 24) || cols > (1u << 24) || (buf.size() - pos) / 8 < cells) {
            throw ParseError(path + ": matrix payload truncated", pos);
        }
        Matrix m(rows, cols);
        for (std::uint64_t c = 0; c < cells; ++c) m.data()[c] = take_f64(buf, pos);
        out.push_back(std::move(m));
    }
    if (pos != buf.size()) throw ParseError(path + ": trailing bytes after bundle", pos);
    return out;
}

void save_attention_params(const std::string& path, const AttentionParams& p) {
    Matrix heads(1, 1);
    heads(0, 0) = double(p.heads);
    save_bundle(path, {p.w_q, p.w_k, p.w_v, p.head_merge, heads});
}

AttentionParams load_attention_params(const std::string& path) {
    std::vector<Matrix> bundle = load_bundle(path);
    if (bundle.size() != 5 || bundle[4].rows() != 1 || bundle[4].cols() != 1) {
        throw ParseError(path + ": expected [w_q, w_k, w_v, head_merge, heads]", 0);
    }
    AttentionParams p;
    p.w_q = std::move(bundle[0]);
    p.w_k = std::move(bundle[1]);
    p.w_v = std::move(bundle[2]);
    p.head_merge = std::move(bundle[3]);
    const double heads = bundle[4](0, 0);
    if (heads < 1.0 || heads != double(std::size_t(heads))) {
        throw ParseError(path + ": bad head count", 0);
    }
    p.heads = std::size_t(heads);
    return p;
}

}  // namespace emseg
