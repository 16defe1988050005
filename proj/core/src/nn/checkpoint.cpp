#include "vdpo/nn/checkpoint.hpp"

#include <array>
#include <fstream>
#include <unordered_map>

#include "vdpo/common/error.hpp"

namespace vdpo::nn {

namespace {

constexpr std::array<char, 8> kMagic = {'V', 'D', 'P', 'O', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ProtocolError("checkpoint: truncated file");
    return v;
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    std::string s(get<std::uint32_t>(in), '\0');
    in.read(s.data(), static_cast<std::streamsize>(s.size()));
    if (!in) throw ProtocolError("checkpoint: truncated file");
    return s;
}

void put_matrix(std::ostream& out, const Matrix& m) {
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix get_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw ProtocolError("checkpoint: truncated file");
    return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamList& params, const std::map<std::string, std::string>& config,
                     std::uint64_t step) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ProtocolError("checkpoint: cannot write '" + path + "'");
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, step);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(config.size()));
    for (const auto& [k, v] : config) {
        put_string(out, k);
        put_string(out, v);
    }
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        put_string(out, p->name);
        put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.rows()));
        put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.cols()));
        put_matrix(out, p->value);
        put_matrix(out, p->adam_m);
        put_matrix(out, p->adam_v);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ProtocolError("checkpoint: cannot open '" + path + "'");
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw ProtocolError("checkpoint: bad magic");
    if (get<std::uint32_t>(in) != kVersion) throw ProtocolError("checkpoint: unsupported version");
    Checkpoint ckpt;
    ckpt.step = get<std::uint64_t>(in);
    const auto entries = get<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < entries; ++i) {
        auto k = get_string(in);
        ckpt.config[k] = get_string(in);
    }
    const auto count = get<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointTensor t;
        t.name = get_string(in);
        const auto rows = static_cast<Eigen::Index>(get<std::uint64_t>(in));
        const auto cols = static_cast<Eigen::Index>(get<std::uint64_t>(in));
        t.value = get_matrix(in, rows, cols);
        t.adam_m = get_matrix(in, rows, cols);
        t.adam_v = get_matrix(in, rows, cols);
        ckpt.tensors.push_back(std::move(t));
    }
    return ckpt;
}

void restore_parameters(const Checkpoint& ckpt, const ParamList& params) {
    std::unordered_map<std::string, const CheckpointTensor*> by_name;
    for (const auto& t : ckpt.tensors) by_name[t.name] = &t;
    for (const auto& p : params) {
        const auto it = by_name.find(p->name);
        if (it == by_name.end()) throw ProtocolError("checkpoint: missing tensor '" + p->name + "'");
        const auto& t = *it->second;
        if (t.value.rows() != p->value.rows() || t.value.cols() != p->value.cols()) {
            throw DimensionError("checkpoint: tensor '" + p->name + "' has the wrong shape");
        }
        p->value = t.value;
        p->adam_m = t.adam_m;
        p->adam_v = t.adam_v;
    }
}

}  // namespace vdpo::nn
