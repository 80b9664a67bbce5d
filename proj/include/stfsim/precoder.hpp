#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "stfsim/channel.hpp"
#include "stfsim/rng.hpp"

namespace stfsim {

// Top-M eigenpairs of R0, descending.
struct EigenSpectrum {
    Eigen::VectorXd values;   // M, >= 0, descending
    Eigen::MatrixXcd basis;   // N_t x M, orthonormal columns

    int streams() const { return static_cast<int>(values.size()); }
    int n_tx() const { return static_cast<int>(basis.rows()); }
};

EigenSpectrum spectrum_of(const CorrelationModel& model, int m);

// Codeword distance product matrix A0 = (X - X')(X - X')^H together with
// its eigensystem. For an orthogonal STBC this is mu0 * I.
struct CodewordDistance {
    Eigen::MatrixXcd a0;   // M x M Hermitian PSD
    double mu0 = 0.0;
    Eigen::MatrixXcd v_a;  // M x M eigenvectors
    Eigen::VectorXd d_a;   // M eigenvalues, descending
};

CodewordDistance ostbc_distance(double mu0, int m);

// F = V diag(d) U^H with ||F||_F = 1.
struct Precoder {
    Eigen::MatrixXcd v;  // N_t x M, orthonormal columns
    Eigen::VectorXd d;   // M, >= 0, sum of squares = 1
    Eigen::MatrixXcd u;  // M x M unitary

    Eigen::MatrixXcd matrix() const { return v * d.asDiagonal() * u.adjoint(); }
    int streams() const { return static_cast<int>(d.size()); }
};

// eta = rho / (4 (N_v sigma_n^2 + sigma_MUI^2)); Gamma = eta L N_v.
struct EffectiveSinr {
    double eta = 0.0;
    double gamma = 0.0;
};

EffectiveSinr effective_sinr(double rho, int n_v, double noise_var, double mui_var, int l_taps);

// Closed-form average-PEP upper bound det(I + eta L N_v F A0 F^H R0)^{-1}.
double pep_bound(const Precoder& prec, const CodewordDistance& dist,
                 const CorrelationModel& model, const EffectiveSinr& sinr, int n_v);

// Monte Carlo estimate of the same bound: average of the conditional
// Chernoff bound over draws of the combined channel ~ CN(0, L N_v R0).
// Kept as the independent cross-check of the closed form.
double pep_bound_monte_carlo(const Precoder& prec, const CodewordDistance& dist,
                             const CorrelationModel& model, const EffectiveSinr& sinr,
                             int n_v, long draws, Rng& rng);

// V0 = top-M eigenvectors of R0, U0 = V_A.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> design_direction(const EigenSpectrum& spectrum,
                                                               const CodewordDistance& dist);

// Water-filling over c_i = eta mu0 L N_v d_R,i; returns the power vector
// d^2 (sums to 1, inactive entries exactly zero).
Eigen::VectorXd waterfill(const EigenSpectrum& spectrum, const CodewordDistance& dist,
                          const EffectiveSinr& sinr, int n_v, const CorrelationModel& model);

// Core solver on the per-stream gains c_i > 0.
Eigen::VectorXd waterfill_powers(const Eigen::VectorXd& c);

Eigen::VectorXd equal_power(int m);

// All power on argmax_m d_A,m d_R,m (lowest index on ties).
Eigen::VectorXd single_beam(const EigenSpectrum& spectrum, const CodewordDistance& dist);

// L N_v (prod_m d_m^2 d_A,m d_R,m)^{1/G_d} with G_d = N_t; zero if any
// factor vanishes.
double coding_gain(const Eigen::VectorXd& d2, const CodewordDistance& dist,
                   const EigenSpectrum& spectrum, int l_taps, int n_v);

// Least-squares slope of -log(pbar) against log(eta).
double diversity_slope(const std::vector<std::pair<double, double>>& curve);

// Direction + water-filling in one step.
Precoder optimal_precoder(const CorrelationModel& model, const CodewordDistance& dist,
                          const EffectiveSinr& sinr, int n_v, int m);

}  // namespace stfsim
