#include "vdpo/mdp/mdp_io.hpp"

#include <sstream>
#include <vector>

#include "vdpo/common/error.hpp"
#include "vdpo/common/text.hpp"

namespace vdpo::mdp {

namespace {

void append_row(std::string& out, const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += format_double(data[i]);
    }
    out += '\n';
}

}  // namespace

std::string format_mdp(const FiniteMdp& mdp) {
    const std::size_t S = mdp.num_states();
    const std::size_t A = mdp.num_actions();
    std::string out = std::to_string(S) + ' ' + std::to_string(A) + ' ' + format_double(mdp.discount()) + '\n';
    for (std::size_t row = 0; row < S * A; ++row) append_row(out, mdp.transition_data().data() + row * S, S);
    for (std::size_t s = 0; s < S; ++s) append_row(out, mdp.reward_data().data() + s * A, A);
    append_row(out, mdp.initial_distribution().data(), S);
    return out;
}

FiniteMdp parse_mdp(std::string_view text) {
    std::vector<std::string> tokens;
    {
        std::istringstream in{std::string(text)};
        std::string tok;
        while (in >> tok) tokens.push_back(tok);
    }
    if (tokens.size() < 3) throw ModelError("parse_mdp: missing header");
    std::size_t pos = 0;
    auto next_int = [&]() -> std::size_t {
        const long long v = parse_int(tokens[pos++]);
        if (v <= 0) throw ModelError("parse_mdp: sizes must be positive");
        return static_cast<std::size_t>(v);
    };
    try {
        const std::size_t S = next_int();
        const std::size_t A = next_int();
        const double gamma = parse_double(tokens[pos++]);
        const std::size_t expected = 3 + S * A * S + S * A + S;
        if (tokens.size() != expected) {
            throw ModelError("parse_mdp: expected " + std::to_string(expected) + " tokens, got " +
                             std::to_string(tokens.size()));
        }
        auto read_n = [&](std::size_t n) {
            std::vector<double> v(n);
            for (auto& x : v) x = parse_double(tokens[pos++]);
            return v;
        };
        auto P = read_n(S * A * S);
        auto R = read_n(S * A);
        auto rho = read_n(S);
        return FiniteMdp(S, A, std::move(P), std::move(R), gamma, std::move(rho));
    } catch (const ConfigError& e) {
        throw ModelError(std::string("parse_mdp: ") + e.what());
    }
}

void save_mdp(const FiniteMdp& mdp, const std::string& path) { write_file(path, format_mdp(mdp)); }

FiniteMdp load_mdp(const std::string& path) { return parse_mdp(read_file(path)); }

}  // namespace vdpo::mdp
