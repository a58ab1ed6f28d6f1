#include "rffsim/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <string>

#include "rffsim/errors.hpp"

namespace rffsim::ldpc {

namespace {

// IEEE 802.11n rate-1/2 base shift matrix for Z = 27 (n = 648).
const std::vector<std::vector<int>> k80211nRate12Z27 = {
    {0, -1, -1, -1, 0, 0, -1, -1, 0, -1, -1, 0, 1, 0, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {22, 0, -1, -1, 17, -1, 0, 0, 12, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1, -1, -1, -1},
    {6, -1, 0, -1, 10, -1, -1, -1, 24, -1, 0, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1, -1, -1},
    {2, -1, -1, 0, 20, -1, -1, -1, 25, 0, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1, -1},
    {23, -1, -1, -1, 3, -1, -1, -1, 0, -1, 9, 11, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1},
    {24, -1, 23, 1, 17, -1, 3, -1, 10, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1},
    {25, -1, -1, -1, 8, -1, -1, -1, 7, 18, -1, -1, 0, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1},
    {13, 24, -1, -1, 0, -1, 8, -1, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1},
    {7, 20, -1, 16, 22, 10, -1, -1, 23, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1, -1},
    {11, -1, -1, -1, 19, -1, -1, -1, 13, -1, 3, 17, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1},
    {25, -1, 8, -1, 23, 18, -1, 14, 9, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0},
    {3, -1, -1, -1, 16, -1, -1, 2, 25, 5, -1, -1, 1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0},
};

// out[i] = v[(i + shift) % Z], the action of the Z x Z cyclic-shift block.
void xor_rotated(const std::uint8_t* v, int shift, int lift, std::uint8_t* out) {
    for (int i = 0; i < lift; ++i) {
        out[i] ^= v[(i + shift) % lift];
    }
}

}  // namespace

ParityCheckSystem from_base_matrix(const std::vector<std::vector<int>>& base, int lift) {
    if (lift < 1) throw ParameterError("from_base_matrix: lift must be >= 1");
    if (base.empty() || base.front().empty()) {
        throw ParameterError("from_base_matrix: empty base matrix");
    }
    const std::size_t cols = base.front().size();
    for (const auto& row : base) {
        if (row.size() != cols) throw ParameterError("from_base_matrix: ragged base matrix");
        for (int s : row) {
            if (s < -1 || s >= lift) {
                throw ParameterError("from_base_matrix: shift out of range for lift");
            }
        }
    }

    ParityCheckSystem sys;
    sys.base = base;
    sys.lift = lift;
    sys.n_checks = static_cast<int>(base.size()) * lift;
    sys.n_bits = static_cast<int>(cols) * lift;
    sys.check_neighbors.assign(sys.n_checks, {});
    sys.bit_neighbors.assign(sys.n_bits, {});

    for (std::size_t br = 0; br < base.size(); ++br) {
        for (std::size_t bc = 0; bc < cols; ++bc) {
            const int shift = base[br][bc];
            if (shift < 0) continue;
            for (int i = 0; i < lift; ++i) {
                const int check = static_cast<int>(br) * lift + i;
                const int bit = static_cast<int>(bc) * lift + (i + shift) % lift;
                sys.check_neighbors[check].push_back(bit);
                sys.bit_neighbors[bit].push_back(check);
            }
        }
    }
    for (auto& nb : sys.check_neighbors) std::sort(nb.begin(), nb.end());
    for (auto& nb : sys.bit_neighbors) std::sort(nb.begin(), nb.end());

    sys.check_offset.reserve(sys.n_checks + 1);
    sys.check_offset.push_back(0);
    for (const auto& nb : sys.check_neighbors) {
        sys.edge_bit.insert(sys.edge_bit.end(), nb.begin(), nb.end());
        sys.check_offset.push_back(static_cast<int>(sys.edge_bit.size()));
    }
    return sys;
}

ParityCheckSystem load_base_matrix(std::istream& is, int lift) {
    std::vector<std::vector<int>> base;
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::vector<int> row;
        int v;
        while (ls >> v) row.push_back(v);
        if (!ls.eof()) throw DataError("load_base_matrix: non-integer token");
        base.push_back(std::move(row));
    }
    return from_base_matrix(base, lift);
}

ParityCheckSystem build_code(int n, double rate) {
    if (n != 648 || rate != 0.5) {
        throw UnsupportedCodeError("build_code: only the (648, rate 1/2) code is supported");
    }
    return from_base_matrix(k80211nRate12Z27, 27);
}

std::vector<std::uint8_t> encode(const ParityCheckSystem& sys,
                                 const std::vector<std::uint8_t>& info_bits) {
    const int Z = sys.lift;
    const int base_rows = static_cast<int>(sys.base.size());
    const int base_cols = static_cast<int>(sys.base.front().size());
    const int info_blocks = base_cols - base_rows;
    if (info_blocks != base_rows || sys.base != k80211nRate12Z27 || Z != 27) {
        throw UnsupportedCodeError("encode: only the built-in 802.11n rate-1/2 structure");
    }
    if (static_cast<int>(info_bits.size()) != info_blocks * Z) {
        throw ParameterError("encode: info length must equal n_bits - n_checks");
    }
    for (auto b : info_bits) {
        if (b > 1) throw ParameterError("encode: bits must be 0 or 1");
    }

    // Per-base-row syndromes of the systematic part.
    std::vector<std::vector<std::uint8_t>> s(base_rows, std::vector<std::uint8_t>(Z, 0));
    for (int r = 0; r < base_rows; ++r) {
        for (int c = 0; c < info_blocks; ++c) {
            const int shift = sys.base[r][c];
            if (shift < 0) continue;
            xor_rotated(info_bits.data() + static_cast<std::size_t>(c) * Z, shift, Z,
                        s[r].data());
        }
    }

    // Dual-diagonal back-substitution. Summing every base row cancels the
    // parity chain and leaves (P^1 + P^0 + P^1) p0 = I p0, so p0 is the xor
    // of all partial syndromes.
    std::vector<std::vector<std::uint8_t>> p(base_rows, std::vector<std::uint8_t>(Z, 0));
    for (int r = 0; r < base_rows; ++r) {
        for (int i = 0; i < Z; ++i) p[0][i] ^= s[r][i];
    }
    // Row 0: s0 + P^1 p0 + p1 = 0.
    p[1] = s[0];
    xor_rotated(p[0].data(), 1, Z, p[1].data());
    // Rows r = 1..base_rows-2: s_r + [h_r] p0 + p_r + p_{r+1} = 0.
    for (int r = 1; r < base_rows - 1; ++r) {
        p[r + 1] = s[r];
        for (int i = 0; i < Z; ++i) p[r + 1][i] ^= p[r][i];
        const int h_shift = sys.base[r][info_blocks];
        if (h_shift >= 0) xor_rotated(p[0].data(), h_shift, Z, p[r + 1].data());
    }

    std::vector<std::uint8_t> codeword(info_bits);
    codeword.reserve(sys.n_bits);
    for (int r = 0; r < base_rows; ++r) {
        codeword.insert(codeword.end(), p[r].begin(), p[r].end());
    }
    return codeword;
}

std::vector<std::uint8_t> syndrome(const ParityCheckSystem& sys,
                                   const std::vector<std::uint8_t>& hard_bits) {
    if (static_cast<int>(hard_bits.size()) != sys.n_bits) {
        throw ParameterError("syndrome: word length does not match code");
    }
    std::vector<std::uint8_t> e(sys.n_checks, 0);
    for (int m = 0; m < sys.n_checks; ++m) {
        std::uint8_t acc = 0;
        for (int bit : sys.check_neighbors[m]) acc ^= (hard_bits[bit] & 1u);
        e[m] = acc;
    }
    return e;
}

DecodeResult sum_product_decode(const ParityCheckSystem& sys, const Eigen::VectorXd& channel_llrs,
                                int max_inner) {
    if (channel_llrs.size() != sys.n_bits) {
        throw ParameterError("sum_product_decode: LLR length does not match code");
    }
    if (!channel_llrs.allFinite()) {
        throw ParameterError("sum_product_decode: LLRs must be finite");
    }
    if (max_inner < 1) throw ParameterError("sum_product_decode: max_inner must be >= 1");

    const int n_edges = static_cast<int>(sys.edge_bit.size());
    std::vector<double> v2c(n_edges), c2v(n_edges, 0.0);
    for (int e = 0; e < n_edges; ++e) v2c[e] = channel_llrs(sys.edge_bit[e]);

    DecodeResult res;
    res.posterior_llrs = channel_llrs;
    res.hard_bits.assign(sys.n_bits, 0);

    std::vector<double> tanh_half, fwd, bwd;
    for (int iter = 1; iter <= max_inner; ++iter) {
        // Check update: extrinsic tanh products via prefix/suffix passes.
        for (int m = 0; m < sys.n_checks; ++m) {
            const int lo = sys.check_offset[m];
            const int hi = sys.check_offset[m + 1];
            const int deg = hi - lo;
            tanh_half.resize(deg);
            fwd.assign(deg, 1.0);
            bwd.assign(deg, 1.0);
            for (int k = 0; k < deg; ++k) {
                tanh_half[k] = std::tanh(
                    std::clamp(v2c[lo + k], -2.0 * kTanhArgClip, 2.0 * kTanhArgClip) / 2.0);
            }
            for (int k = 0; k < deg; ++k) {
                fwd[k] = (k > 0 ? fwd[k - 1] : 1.0) * tanh_half[k];
            }
            for (int k = deg - 1; k >= 0; --k) {
                bwd[k] = (k < deg - 1 ? bwd[k + 1] : 1.0) * tanh_half[k];
            }
            for (int k = 0; k < deg; ++k) {
                const double ext = (k > 0 ? fwd[k - 1] : 1.0) * (k < deg - 1 ? bwd[k + 1] : 1.0);
                const double clipped = std::clamp(ext, -0.999999999999999, 0.999999999999999);
                c2v[lo + k] = 2.0 * std::atanh(clipped);
            }
        }

        // Bit update: posterior and extrinsic bit-to-check messages.
        res.posterior_llrs = channel_llrs;
        for (int e = 0; e < n_edges; ++e) res.posterior_llrs(sys.edge_bit[e]) += c2v[e];
        for (int b = 0; b < sys.n_bits; ++b) {
            res.hard_bits[b] = res.posterior_llrs(b) < 0.0 ? 1 : 0;
        }
        res.iterations_used = iter;
        if (is_codeword(sys, res.hard_bits)) {
            res.converged = true;
            return res;
        }
        for (int e = 0; e < n_edges; ++e) {
            v2c[e] = std::clamp(res.posterior_llrs(sys.edge_bit[e]) - c2v[e], -kLlrClip, kLlrClip);
        }
    }
    res.converged = false;
    return res;
}

}  // namespace rffsim::ldpc
