#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace rffsim::ldpc {

// Quasi-cyclic parity-check system: base shift matrix lifted by Z, expanded
// Tanner adjacency, and flat edge arrays used by the decoder.
struct ParityCheckSystem {
    std::vector<std::vector<int>> base;  // shift matrix, -1 = zero block
    int lift = 1;                        // Z
    int n_bits = 0;                      // C = base cols * Z
    int n_checks = 0;                    // B' = base rows * Z

    std::vector<std::vector<int>> check_neighbors;  // per check: bit indices
    std::vector<std::vector<int>> bit_neighbors;    // per bit: check indices

    // Flat edge list grouped by check: edge_bit[k] is the bit of the k-th
    // edge, check_offset[m]..check_offset[m+1] spans check m's edges.
    std::vector<int> edge_bit;
    std::vector<int> check_offset;
};

// Expand a base shift matrix into the full Tanner structure. Works for any
// base matrix, including Z = 1 fixtures where the base matrix is H itself
// (entries 0 for a one, -1 for a zero).
ParityCheckSystem from_base_matrix(const std::vector<std::vector<int>>& base, int lift);

// Plain-text base matrix: one row per line, space-separated shifts, -1 for
// zero blocks.
ParityCheckSystem load_base_matrix(std::istream& is, int lift);

// The rate-1/2, Z=27, n=648 IEEE 802.11n code. Only this point is supported.
ParityCheckSystem build_code(int n, double rate);

// Systematic dual-diagonal encoding for the 802.11n structure.
std::vector<std::uint8_t> encode(const ParityCheckSystem& sys,
                                 const std::vector<std::uint8_t>& info_bits);

// e = H b over GF(2); zero iff b is a codeword.
std::vector<std::uint8_t> syndrome(const ParityCheckSystem& sys,
                                   const std::vector<std::uint8_t>& hard_bits);

inline bool is_codeword(const ParityCheckSystem& sys, const std::vector<std::uint8_t>& bits) {
    for (auto e : syndrome(sys, bits)) {
        if (e) return false;
    }
    return true;
}

struct DecodeResult {
    std::vector<std::uint8_t> hard_bits;
    Eigen::VectorXd posterior_llrs;
    bool converged = false;
    int iterations_used = 0;
};

// Standard sum-product over the Tanner graph: tanh-product check update and
// additive bit update, both with extrinsic exclusion; syndrome early exit.
// Sign convention: positive LLR decides bit 0.
DecodeResult sum_product_decode(const ParityCheckSystem& sys, const Eigen::VectorXd& channel_llrs,
                                int max_inner);

// Numerical guards shared with the outer-loop decoder.
constexpr double kLlrClip = 50.0;
constexpr double kTanhArgClip = 19.07;

}  // namespace rffsim::ldpc
