#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace eos::fock {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Product of truncated single-mode spaces, indexed row-major over the mode cutoffs
// (the first mode is the most significant digit). Each mode holds 0 ... cutoff photons.
class FockSpace {
public:
    FockSpace(std::vector<int> cutoffs, std::vector<std::string> labels);

    std::size_t dim() const { return dim_; }
    std::size_t modes() const { return cutoffs_.size(); }
    int cutoff(std::size_t mode) const { return cutoffs_[mode]; }
    const std::string& label(std::size_t mode) const { return labels_[mode]; }

    std::size_t index(const std::vector<int>& occupation) const;
    std::vector<int> occupation(std::size_t index) const;

private:
    std::vector<int> cutoffs_;
    std::vector<std::string> labels_;
    std::vector<std::size_t> stride_;
    std::size_t dim_;
};

// coefficient * f_1 f_2 ... f_k with each factor a or a^dagger on one mode; applied
// right to left, with creation on a full mode giving zero.
struct Ladder {
    std::size_t mode;
    bool create;
};

struct LadderTerm {
    cplx coefficient;
    std::vector<Ladder> factors;
};

// Sum of ladder monomials, applied without forming a matrix.
class Operator {
public:
    Operator() = default;
    explicit Operator(std::vector<LadderTerm> terms) : terms_(std::move(terms)) {}

    void add(LadderTerm t) { terms_.push_back(std::move(t)); }
    const std::vector<LadderTerm>& terms() const { return terms_; }

    Vector apply(const FockSpace& space, const Vector& psi) const;
    Matrix dense(const FockSpace& space) const;

private:
    std::vector<LadderTerm> terms_;
};

Operator annihilator(std::size_t mode);
Operator creator(std::size_t mode);

// Coupling model. For one channel the modes are (probe, MIR, NIR); for two channels
// (probe 1, probe 2, MIR, NIR 1, NIR 2) with one MIR mode shared by both channels.
struct ThreeModeModel {
    cplx A{0.0, 0.0};
    cplx C{0.0, 0.0};
    cplx alpha{0.0, 0.0};
    int channels = 1;
    cplx A2{0.0, 0.0};
    cplx C2{0.0, 0.0};
    cplx alpha2{0.0, 0.0};
    // Empty: defaults of 24/6/6 for one channel and 12/12/4/4/4 for two.
    std::vector<int> cutoffs{};

    std::vector<int> resolved_cutoffs() const;
    void validate() const;
};

FockSpace make_space(const ThreeModeModel& m);

// ln U = A a_M^+ a_N^+ a_p - A* a_M a_N a_p^+ + C a_M a_N^+ a_p - C* a_M^+ a_N a_p^+, summed
// over channels.
Operator build_generator(const ThreeModeModel& m);
// Signal operator S = i (a_p^+ a_N - a_N^+ a_p) of channel 0 or 1.
Operator signal_operator(const ThreeModeModel& m, int channel = 0);

// Product of normalized truncated coherent states on the probes and vacuum elsewhere.
Vector initial_state(const ThreeModeModel& m);

struct Diagnostics {
    // Norm of the truncated coherent expansion before renormalization (per probe, worst).
    double coherent_norm = 1.0;
    // Probability weight on states with some mode at its cutoff, maximized over the
    // states involved in the calculation.
    double boundary_population = 0.0;
    bool truncation_flag = false;
    std::vector<std::string> warnings;
};

double boundary_population(const FockSpace& space, const Vector& psi);

struct PerturbativeComponents {
    double shot = 0.0;        // <sig0|sig0>
    double sig1_sq = 0.0;     // <sig1|sig1>
    double sig0_sig2 = 0.0;   // <sig0|sig2> + c.c.
    double first_order = 0.0; // <sig0|sig1> + c.c.
    Diagnostics diagnostics;
};

PerturbativeComponents perturbative_components(const ThreeModeModel& m);
// <S^2> through the given order in the couplings (0, 1 or 2).
double perturbative_variance(const ThreeModeModel& m, int order = 2);

struct HeisenbergVariances {
    double S1_sq = 0.0;    // <[S, lnU]^2>
    double S2S0_sym = 0.0; // <S2 S + S S2>, S2 = [[S, lnU], lnU] / 2
    Diagnostics diagnostics;
};

HeisenbergVariances heisenberg_variances(const ThreeModeModel& m);

// Thrown when the matrix exponential series fails to converge.
class ExponentialError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// exp(M) by scaling and squaring with a Taylor core.
Matrix expm(const Matrix& M);

struct ExactResult {
    double variance = 0.0;
    double norm = 1.0;
    Diagnostics diagnostics;
};

// <S^2> after the full evolution exp(ln U), single channel. The generator conserves
// n_p + n_N, so the exponential is taken block by block.
ExactResult exact_variance(const ThreeModeModel& m);

struct TwoChannelOracle {
    double cross_sig1 = 0.0;  // <sig1_ch1|sig1_ch2> + c.c.
    double cross_sig02 = 0.0; // <sig0_ch1|sig2_ch2> + <sig2_ch1|sig0_ch2> + c.c.
    double base_cross = 0.0;  // |<sig0_ch1|sig0_ch2>|
    Diagnostics diagnostics;
};

TwoChannelOracle two_channel_oracle(const ThreeModeModel& m);

// Reference expressions.
namespace closed_form {
double variance(cplx A, cplx C, cplx alpha);
double sig1_sq(cplx A, cplx alpha);
double sig0_sig2(cplx A, cplx C, cplx alpha);
double S1_sq(cplx A, cplx C, cplx alpha);
double S2S0_sym(cplx A, cplx C, cplx alpha);
double cross_sig1(cplx A1, cplx A2, cplx alpha1, cplx alpha2);
double cross_sig02(cplx A1, cplx A2, cplx C1, cplx C2, cplx alpha1, cplx alpha2);
} // namespace closed_form

} // namespace eos::fock
