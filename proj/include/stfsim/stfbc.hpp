#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <utility>
#include <vector>

#include "stfsim/precoder.hpp"

namespace stfsim {

// Gray-mapped 16-QAM with unit average energy. Index bits b3b2 select the
// in-phase level, b1b0 the quadrature level.
class Constellation {
public:
    static const Constellation& qam16();

    int size() const { return static_cast<int>(points_.size()); }
    std::complex<double> point(int idx) const { return points_[idx]; }
    const std::array<std::complex<double>, 16>& points() const { return points_; }

    // Closest point, lowest index on ties.
    int nearest(std::complex<double> y) const;

    // Smallest squared distance over distinct point pairs; this is the
    // worst-case OSTBC distance factor mu0 used for precoder design.
    double min_distance_sq() const;

private:
    Constellation();
    std::array<std::complex<double>, 16> points_;
};

// Alamouti codeword, streams on rows and time slots on columns:
//   [ s1  -s2* ]
//   [ s2   s1* ]
struct Codeword {
    Eigen::Matrix2cd x;
    std::array<std::complex<double>, 2> symbols;
};

Codeword encode(std::complex<double> s1, std::complex<double> s2);

CodewordDistance codeword_distance(const Codeword& a, const Codeword& b);

// Rows of a Sylvester-Hadamard matrix; exactly orthogonal, user k owns row k.
class SpreadingCodeSet {
public:
    static SpreadingCodeSet walsh_hadamard(int n_users, int n_v);

    int n_users() const { return static_cast<int>(codes_.rows()); }
    int spread_factor() const { return static_cast<int>(codes_.cols()); }
    Eigen::RowVectorXd row(int k) const { return codes_.row(k); }

private:
    Eigen::MatrixXd codes_;
};

// Subcarrier indices of spreading group g: {g + m * (N_c / N_v)}.
std::vector<int> group_subcarriers(int group, int n_c, int n_v);

// Per-subcarrier transmit blocks F c_i X (the sqrt(rho) scale is applied
// at the link layer).
std::vector<Eigen::MatrixXcd> spread_and_map(const Codeword& cw, const Eigen::RowVectorXd& code,
                                             const Precoder& prec);

// Equal-gain combining: Ybar = sum_i c_i Y_i.
Eigen::RowVector2cd despread_egc(const std::vector<Eigen::RowVector2cd>& received,
                                 const Eigen::RowVectorXd& code);

// Exhaustive ML over all 256 symbol pairs; h_eff must carry the sqrt(rho)
// scale. Ties resolve to the lowest (i1, i2) pair.
std::pair<int, int> ml_detect(const Eigen::RowVector2cd& combined,
                              const Eigen::RowVector2cd& h_eff, const Constellation& cons);

// Alamouti linear decoupling; produces the same decisions as ml_detect.
std::pair<int, int> ml_detect_decoupled(const Eigen::RowVector2cd& combined,
                                        const Eigen::RowVector2cd& h_eff,
                                        const Constellation& cons);

}  // namespace stfsim
