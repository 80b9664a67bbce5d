#include "stfsim/stfbc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stfsim {

namespace {

// Gray order over 2 bits: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
double gray_level(int bits) {
    switch (bits) {
        case 0: return -3.0;
        case 1: return -1.0;
        case 3: return 1.0;
        default: return 3.0;
    }
}

}  // namespace

Constellation::Constellation() {
    const double scale = 1.0 / std::sqrt(10.0);
    for (int idx = 0; idx < 16; ++idx) {
        const double re = gray_level((idx >> 2) & 3) * scale;
        const double im = gray_level(idx & 3) * scale;
        points_[idx] = {re, im};
    }
}

const Constellation& Constellation::qam16() {
    static const Constellation c;
    return c;
}

int Constellation::nearest(std::complex<double> y) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 16; ++i) {
        const double d = std::norm(y - points_[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

double Constellation::min_distance_sq() const {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            if (i != j) best = std::min(best, std::norm(points_[i] - points_[j]));
    return best;
}

Codeword encode(std::complex<double> s1, std::complex<double> s2) {
    Codeword cw;
    cw.symbols = {s1, s2};
    cw.x << s1, -std::conj(s2), s2, std::conj(s1);
    return cw;
}

CodewordDistance codeword_distance(const Codeword& a, const Codeword& b) {
    const Eigen::Matrix2cd delta = a.x - b.x;
    CodewordDistance d;
    d.a0 = delta * delta.adjoint();
    d.mu0 = d.a0(0, 0).real();
    const EigenSystem es = sorted_eig(d.a0);
    d.v_a = es.vectors;
    d.d_a = es.values;
    return d;
}

SpreadingCodeSet SpreadingCodeSet::walsh_hadamard(int n_users, int n_v) {
    if (n_v < 1 || (n_v & (n_v - 1)) != 0)
        throw std::invalid_argument("spread factor must be a power of two");
    if (n_users < 1 || n_users > n_v)
        throw std::invalid_argument("user count must lie in [1, N_v]");
    SpreadingCodeSet set;
    set.codes_.resize(n_users, n_v);
    for (int m = 0; m < n_users; ++m)
        for (int i = 0; i < n_v; ++i)
            set.codes_(m, i) = __builtin_parity(static_cast<unsigned>(m & i)) ? -1.0 : 1.0;
    return set;
}

std::vector<int> group_subcarriers(int group, int n_c, int n_v) {
    if (n_v < 1 || n_c < 1 || n_c % n_v != 0)
        throw std::invalid_argument("N_c must be a positive multiple of N_v");
    const int spacing = n_c / n_v;
    if (group < 0 || group >= spacing) throw std::invalid_argument("group index out of range");
    std::vector<int> idx(n_v);
    for (int m = 0; m < n_v; ++m) idx[m] = group + m * spacing;
    return idx;
}

std::vector<Eigen::MatrixXcd> spread_and_map(const Codeword& cw, const Eigen::RowVectorXd& code,
                                             const Precoder& prec) {
    const Eigen::MatrixXcd f = prec.matrix();
    std::vector<Eigen::MatrixXcd> blocks(code.size());
    const Eigen::MatrixXcd fx = f * cw.x;
    for (int i = 0; i < code.size(); ++i) blocks[i] = code(i) * fx;
    return blocks;
}

Eigen::RowVector2cd despread_egc(const std::vector<Eigen::RowVector2cd>& received,
                                 const Eigen::RowVectorXd& code) {
    if (static_cast<int>(received.size()) != code.size())
        throw std::invalid_argument("received block count must match the spread factor");
    Eigen::RowVector2cd out = Eigen::RowVector2cd::Zero();
    for (int i = 0; i < code.size(); ++i) out += code(i) * received[i];
    return out;
}

std::pair<int, int> ml_detect(const Eigen::RowVector2cd& combined,
                              const Eigen::RowVector2cd& h_eff, const Constellation& cons) {
    int best1 = 0, best2 = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i1 = 0; i1 < cons.size(); ++i1) {
        for (int i2 = 0; i2 < cons.size(); ++i2) {
            const Codeword cw = encode(cons.point(i1), cons.point(i2));
            const double d = (combined - h_eff * cw.x).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best1 = i1;
                best2 = i2;
            }
        }
    }
    return {best1, best2};
}

std::pair<int, int> ml_detect_decoupled(const Eigen::RowVector2cd& combined,
                                        const Eigen::RowVector2cd& h_eff,
                                        const Constellation& cons) {
    const double g = h_eff.squaredNorm();
    if (g <= 0.0) return {0, 0};
    const std::complex<double> h1 = h_eff(0), h2 = h_eff(1);
    const std::complex<double> y1 = combined(0), y2 = combined(1);
    const std::complex<double> z1 = (std::conj(h1) * y1 + h2 * std::conj(y2)) / g;
    const std::complex<double> z2 = (std::conj(h2) * y1 - h1 * std::conj(y2)) / g;
    return {cons.nearest(z1), cons.nearest(z2)};
}

}  // namespace stfsim
