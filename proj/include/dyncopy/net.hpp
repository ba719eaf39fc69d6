#pragma once

// Three-layer M-N-L network: z = W_out f(W_in x + b_hid) + b_out. //

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace dyncopy {

/// Hidden-layer transfer function.
enum class transfer_kind : std::uint32_t {
    tanh = 0,  ///< h -> tanh(h)
    gauss = 1  ///< h -> exp(-h^2)
};

std::string_view to_string(transfer_kind kind);
transfer_kind parse_transfer_kind(std::string_view name);

/// Evaluate the transfer function. Throws domain_error on non-finite input.
double transfer(transfer_kind kind, double h);

/// Unchecked variant for inner loops.
inline double transfer_unchecked(transfer_kind kind, double h);

/// The weight set of an M-N-L network.
///
/// All parameters live in one flat vector, in the order
///   w_in (n x m, row-major), b_hid (n), w_out (l x n, row-major), b_out (l),
/// which is also the serialization order and the coordinate numbering the
/// Monte-Carlo trainer perturbs.
class network {
public:
    /// Zero-initialized network. Throws shape_error if any dimension is zero.
    network(std::size_t m, std::size_t n, std::size_t l, transfer_kind kind);

    std::size_t inputs() const { return m_; }
    std::size_t hidden() const { return n_; }
    std::size_t outputs() const { return l_; }
    transfer_kind transfer() const { return kind_; }

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    std::span<double> w_in() { return params().subspan(w_in_offset(), n_ * m_); }
    std::span<const double> w_in() const { return params().subspan(w_in_offset(), n_ * m_); }
    std::span<double> b_hid() { return params().subspan(b_hid_offset(), n_); }
    std::span<const double> b_hid() const { return params().subspan(b_hid_offset(), n_); }
    std::span<double> w_out() { return params().subspan(w_out_offset(), l_ * n_); }
    std::span<const double> w_out() const { return params().subspan(w_out_offset(), l_ * n_); }
    std::span<double> b_out() { return params().subspan(b_out_offset(), l_); }
    std::span<const double> b_out() const { return params().subspan(b_out_offset(), l_); }

    std::size_t w_in_offset() const { return 0; }
    std::size_t b_hid_offset() const { return n_ * m_; }
    std::size_t w_out_offset() const { return n_ * m_ + n_; }
    std::size_t b_out_offset() const { return n_ * m_ + n_ + l_ * n_; }

    /// Evaluate the network. Throws shape_error on a length mismatch.
    std::vector<double> forward(std::span<const double> x) const;

    /// Allocation-free evaluation; `hidden` must hold n values and is overwritten.
    void forward(std::span<const double> x, std::span<double> z, std::span<double> hidden) const;

    /// Largest absolute parameter value.
    double max_abs_param() const;

    friend bool operator==(const network&, const network&) = default;

private:
    std::size_t m_;
    std::size_t n_;
    std::size_t l_;
    transfer_kind kind_;
    std::vector<double> params_;
};

/// Network with every parameter uniform in [-bound, +bound], deterministic in `seed`.
network init_random(
  std::size_t m, std::size_t n, std::size_t l, transfer_kind kind, double bound, std::uint64_t seed);

/// Binary model file. Layout (all integers and floats little-endian):
///
///   offset 0   8 bytes   magic "DYNCNET1"
///   offset 8   uint32    m
///   offset 12  uint32    n
///   offset 16  uint32    l
///   offset 20  uint32    transfer tag (0 = tanh, 1 = gauss)
///   offset 24  float64[] parameters in network::params() order
void write_network(std::ostream& out, const network& net);
network read_network(std::istream& in);
void save_network(const std::filesystem::path& path, const network& net);
network load_network(const std::filesystem::path& path);

// --- inline ---

inline double transfer_unchecked(transfer_kind kind, double h)
{
    if (kind == transfer_kind::tanh) return std::tanh(h);
    return std::exp(-h * h);
}

}  // namespace dyncopy
