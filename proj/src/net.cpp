#include "dyncopy/net.hpp"

#include "dyncopy/error.hpp"
#include "dyncopy/random.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace dyncopy {

std::string_view to_string(transfer_kind kind)
{
    return kind == transfer_kind::tanh ? "tanh" : "gauss";
}

transfer_kind parse_transfer_kind(std::string_view name)
{
    if (name == "tanh") return transfer_kind::tanh;
    if (name == "gauss") return transfer_kind::gauss;
    throw format_error{"unknown transfer kind '" + std::string{name} + "' (expected tanh or gauss)"};
}

double transfer(transfer_kind kind, double h)
{
    if (!std::isfinite(h)) throw domain_error{"transfer: non-finite input"};
    return transfer_unchecked(kind, h);
}

network::network(std::size_t m, std::size_t n, std::size_t l, transfer_kind kind)
  : m_{m}, n_{n}, l_{l}, kind_{kind}
{
    if (m == 0 || n == 0 || l == 0)
        throw shape_error{"network: dimensions must be positive, got " + std::to_string(m) + "-"
                          + std::to_string(n) + "-" + std::to_string(l)};
    params_.assign(n * m + n + l * n + l, 0.0);
}

std::vector<double> network::forward(std::span<const double> x) const
{
    std::vector<double> z(l_);
    std::vector<double> hidden(n_);
    forward(x, z, hidden);
    return z;
}

void network::forward(std::span<const double> x, std::span<double> z, std::span<double> hidden) const
{
    if (x.size() != m_)
        throw shape_error{"forward: input has length " + std::to_string(x.size()) + ", expected "
                          + std::to_string(m_)};
    if (z.size() != l_ || hidden.size() != n_) throw shape_error{"forward: output or scratch has wrong length"};
    const double* w = params_.data() + w_in_offset();
    const double* bh = params_.data() + b_hid_offset();
    for (std::size_t j = 0; j < n_; ++j) {
        double h = bh[j];
        const double* row = w + j * m_;
        for (std::size_t i = 0; i < m_; ++i) h += row[i] * x[i];
        hidden[j] = transfer_unchecked(kind_, h);
    }
    const double* wo = params_.data() + w_out_offset();
    const double* bo = params_.data() + b_out_offset();
    for (std::size_t k = 0; k < l_; ++k) {
        double acc = bo[k];
        const double* row = wo + k * n_;
        for (std::size_t j = 0; j < n_; ++j) acc += row[j] * hidden[j];
        z[k] = acc;
    }
}

double network::max_abs_param() const
{
    double mx = 0.0;
    for (double p : params_) mx = std::max(mx, std::abs(p));
    return mx;
}

network init_random(
  std::size_t m, std::size_t n, std::size_t l, transfer_kind kind, double bound, std::uint64_t seed)
{
    if (!(bound > 0.0) || !std::isfinite(bound)) throw domain_error{"init_random: bound must be positive"};
    network net{m, n, l, kind};
    prng_t prng{seed};
    for (double& p : net.params()) p = uniform(prng, -bound, bound);
    return net;
}

namespace {

constexpr std::array<char, 8> model_magic{'D', 'Y', 'N', 'C', 'N', 'E', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v)
{
    std::array<char, 4> b{};
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(b.data(), b.size());
}

void put_f64(std::ostream& out, double v)
{
    auto u = std::bit_cast<std::uint64_t>(v);
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xffu);
    out.write(b.data(), b.size());
}

template <std::size_t N>
std::array<unsigned char, N> get_bytes(std::istream& in, const char* field)
{
    std::array<char, N> b{};
    if (!in.read(b.data(), N)) throw format_error{std::string{"model file truncated while reading "} + field};
    std::array<unsigned char, N> u{};
    std::memcpy(u.data(), b.data(), N);
    return u;
}

std::uint32_t get_u32(std::istream& in, const char* field)
{
    auto b = get_bytes<4>(in, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in)
{
    auto b = get_bytes<8>(in, "parameters");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

}  // namespace

void write_network(std::ostream& out, const network& net)
{
    out.write(model_magic.data(), model_magic.size());
    put_u32(out, static_cast<std::uint32_t>(net.inputs()));
    put_u32(out, static_cast<std::uint32_t>(net.hidden()));
    put_u32(out, static_cast<std::uint32_t>(net.outputs()));
    put_u32(out, static_cast<std::uint32_t>(net.transfer()));
    for (double p : net.params()) put_f64(out, p);
}

network read_network(std::istream& in)
{
    auto magic = get_bytes<8>(in, "magic");
    if (!std::equal(magic.begin(), magic.end(), model_magic.begin(), [](unsigned char a, char b) {
            return a == static_cast<unsigned char>(b);
        }))
        throw format_error{"model file: bad magic"};
    std::uint32_t m = get_u32(in, "m");
    std::uint32_t n = get_u32(in, "n");
    std::uint32_t l = get_u32(in, "l");
    std::uint32_t tag = get_u32(in, "transfer tag");
    if (tag > 1) throw format_error{"model file: unknown transfer tag " + std::to_string(tag)};
    network net{m, n, l, static_cast<transfer_kind>(tag)};
    for (double& p : net.params()) p = get_f64(in);
    return net;
}

void save_network(const std::filesystem::path& path, const network& net)
{
    std::ofstream out{path, std::ios::binary};
    if (!out) throw error{"cannot open " + path.string() + " for writing"};
    write_network(out, net);
}

network load_network(const std::filesystem::path& path)
{
    std::ifstream in{path, std::ios::binary};
    if (!in) throw error{"cannot open " + path.string()};
    return read_network(in);
}

}  // namespace dyncopy
