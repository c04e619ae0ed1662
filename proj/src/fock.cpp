#include "eos/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace eos::fock {

FockSpace::FockSpace(std::vector<int> cutoffs, std::vector<std::string> labels)
    : cutoffs_(std::move(cutoffs)), labels_(std::move(labels)) {
    if (cutoffs_.empty() || labels_.size() != cutoffs_.size())
        throw std::invalid_argument("Fock space needs one label per mode");
    stride_.assign(cutoffs_.size(), 1);
    dim_ = 1;
    for (std::size_t k = cutoffs_.size(); k-- > 0;) {
        if (cutoffs_[k] < 1)
            throw std::invalid_argument("mode cutoffs must be at least 1");
        stride_[k] = dim_;
        dim_ *= static_cast<std::size_t>(cutoffs_[k] + 1);
    }
}

std::size_t FockSpace::index(const std::vector<int>& occ) const {
    std::size_t i = 0;
    for (std::size_t k = 0; k < occ.size(); ++k) {
        if (occ[k] < 0 || occ[k] > cutoffs_[k])
            throw std::out_of_range("occupation outside the truncated space");
        i += stride_[k] * static_cast<std::size_t>(occ[k]);
    }
    return i;
}

std::vector<int> FockSpace::occupation(std::size_t index) const {
    std::vector<int> occ(cutoffs_.size());
    for (std::size_t k = 0; k < occ.size(); ++k) {
        occ[k] = static_cast<int>(index / stride_[k]);
        index %= stride_[k];
    }
    return occ;
}

Vector Operator::apply(const FockSpace& space, const Vector& psi) const {
    if (static_cast<std::size_t>(psi.size()) != space.dim())
        throw std::invalid_argument("state dimension does not match the Fock space");
    Vector out = Vector::Zero(psi.size());
    std::vector<int> occ;
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const cplx c = psi[static_cast<Eigen::Index>(i)];
        if (c == cplx(0.0))
            continue;
        const auto base = space.occupation(i);
        for (const auto& t : terms_) {
            occ = base;
            double amp = 1.0;
            bool zero = false;
            for (auto f = t.factors.rbegin(); f != t.factors.rend() && !zero; ++f) {
                int& n = occ[f->mode];
                if (f->create) {
                    if (n == space.cutoff(f->mode)) {
                        zero = true;
                    } else {
                        amp *= std::sqrt(static_cast<double>(n + 1));
                        ++n;
                    }
                } else {
                    if (n == 0) {
                        zero = true;
                    } else {
                        amp *= std::sqrt(static_cast<double>(n));
                        --n;
                    }
                }
            }
            if (!zero)
                out[static_cast<Eigen::Index>(space.index(occ))] += t.coefficient * amp * c;
        }
    }
    return out;
}

Matrix Operator::dense(const FockSpace& space) const {
    const auto n = static_cast<Eigen::Index>(space.dim());
    Matrix M(n, n);
    Vector e = Vector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        e[j] = 1.0;
        M.col(j) = apply(space, e);
        e[j] = 0.0;
    }
    return M;
}

Operator annihilator(std::size_t mode) { return Operator(std::vector<LadderTerm>{{1.0, {{mode, false}}}}); }
Operator creator(std::size_t mode) { return Operator(std::vector<LadderTerm>{{1.0, {{mode, true}}}}); }

std::vector<int> ThreeModeModel::resolved_cutoffs() const {
    if (!cutoffs.empty())
        return cutoffs;
    if (channels == 2)
        return {12, 12, 4, 4, 4};
    return {24, 6, 6};
}

void ThreeModeModel::validate() const {
    if (channels != 1 && channels != 2)
        throw std::invalid_argument("channels must be 1 or 2");
    const auto c = resolved_cutoffs();
    if (c.size() != (channels == 1 ? 3u : 5u))
        throw std::invalid_argument(channels == 1 ? "one channel needs 3 cutoffs (probe, MIR, NIR)"
                                                  : "two channels need 5 cutoffs (probe1, probe2, MIR, NIR1, NIR2)");
}

FockSpace make_space(const ThreeModeModel& m) {
    m.validate();
    if (m.channels == 1)
        return FockSpace(m.resolved_cutoffs(), {"probe", "mir", "nir"});
    return FockSpace(m.resolved_cutoffs(), {"probe1", "probe2", "mir", "nir1", "nir2"});
}

namespace {

struct ChannelModes {
    std::size_t p, M, N;
};

ChannelModes channel_modes(const ThreeModeModel& m, int channel) {
    if (m.channels == 1)
        return {0, 1, 2};
    return channel == 0 ? ChannelModes{0, 2, 3} : ChannelModes{1, 2, 4};
}

void add_channel(Operator& L, cplx A, cplx C, const ChannelModes& c) {
    L.add({A, {{c.M, true}, {c.N, true}, {c.p, false}}});
    L.add({-std::conj(A), {{c.M, false}, {c.N, false}, {c.p, true}}});
    L.add({C, {{c.M, false}, {c.N, true}, {c.p, false}}});
    L.add({-std::conj(C), {{c.M, true}, {c.N, false}, {c.p, true}}});
}

Vector coherent(cplx alpha, int cutoff, double& raw_norm) {
    Vector v(cutoff + 1);
    cplx term = 1.0;
    for (int n = 0; n <= cutoff; ++n) {
        if (n > 0)
            term *= alpha / std::sqrt(static_cast<double>(n));
        v[n] = term;
    }
    raw_norm = v.squaredNorm() * std::exp(-std::norm(alpha));
    return v / v.norm();
}

Vector vacuum(int cutoff) {
    Vector v = Vector::Zero(cutoff + 1);
    v[0] = 1.0;
    return v;
}

Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

double inner_real(const Vector& a, const Vector& b) { return a.dot(b).real(); }

Diagnostics diagnose(const ThreeModeModel& m, const FockSpace& space, std::initializer_list<const Vector*> states) {
    Diagnostics d;
    const auto c = m.resolved_cutoffs();
    double r1 = 1.0, r2 = 1.0;
    coherent(m.alpha, c[0], r1);
    if (m.channels == 2)
        coherent(m.alpha2, c[1], r2);
    d.coherent_norm = std::min(r1, r2);
    if (d.coherent_norm < 1.0 - 1e-8) {
        d.truncation_flag = true;
        d.warnings.push_back("probe cutoff too small for |alpha|: truncated coherent norm " +
                             std::to_string(d.coherent_norm));
    }
    for (const Vector* s : states) {
        const double n = s->norm();
        if (n > 0.0)
            d.boundary_population = std::max(d.boundary_population, boundary_population(space, *s / n));
    }
    if (d.boundary_population > 1e-8) {
        d.truncation_flag = true;
        d.warnings.push_back("population at the cutoff boundary " + std::to_string(d.boundary_population));
    }
    auto check = [&](cplx g, cplx a, const char* name) {
        if (std::abs(g * a) >= 0.3) {
            std::ostringstream s;
            s << "perturbative validity: |" << name << " alpha| = " << std::abs(g * a) << " >= 0.3";
            d.warnings.push_back(s.str());
        }
    };
    check(m.A, m.alpha, "A");
    check(m.C, m.alpha, "C");
    if (m.channels == 2) {
        check(m.A2, m.alpha2, "A2");
        check(m.C2, m.alpha2, "C2");
    }
    return d;
}

} // namespace

Operator build_generator(const ThreeModeModel& m) {
    m.validate();
    Operator L;
    add_channel(L, m.A, m.C, channel_modes(m, 0));
    if (m.channels == 2)
        add_channel(L, m.A2, m.C2, channel_modes(m, 1));
    return L;
}

Operator signal_operator(const ThreeModeModel& m, int channel) {
    const auto c = channel_modes(m, channel);
    const cplx i(0.0, 1.0);
    return Operator(std::vector<LadderTerm>{{i, {{c.p, true}, {c.N, false}}}, {-i, {{c.N, true}, {c.p, false}}}});
}

Vector initial_state(const ThreeModeModel& m) {
    const auto c = m.resolved_cutoffs();
    double raw = 0.0;
    if (m.channels == 1)
        return kron(kron(coherent(m.alpha, c[0], raw), vacuum(c[1])), vacuum(c[2]));
    Vector v = kron(coherent(m.alpha, c[0], raw), coherent(m.alpha2, c[1], raw));
    for (std::size_t k = 2; k < 5; ++k)
        v = kron(v, vacuum(c[k]));
    return v;
}

double boundary_population(const FockSpace& space, const Vector& psi) {
    double w = 0.0;
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const auto occ = space.occupation(i);
        bool edge = false;
        for (std::size_t k = 0; k < occ.size(); ++k)
            edge = edge || occ[k] == space.cutoff(k);
        if (edge)
            w += std::norm(psi[static_cast<Eigen::Index>(i)]);
    }
    return w;
}

PerturbativeComponents perturbative_components(const ThreeModeModel& m) {
    const auto space = make_space(m);
    const auto L = build_generator(m);
    const auto S = signal_operator(m, 0);
    const Vector psi = initial_state(m);
    const Vector o1 = L.apply(space, psi);
    const Vector o2 = 0.5 * L.apply(space, o1);
    const Vector s0 = S.apply(space, psi), s1 = S.apply(space, o1), s2 = S.apply(space, o2);
    PerturbativeComponents out;
    out.shot = s0.squaredNorm();
    out.first_order = 2.0 * inner_real(s0, s1);
    out.sig1_sq = s1.squaredNorm();
    out.sig0_sig2 = 2.0 * inner_real(s0, s2);
    out.diagnostics = diagnose(m, space, {&psi, &o1, &o2});
    return out;
}

double perturbative_variance(const ThreeModeModel& m, int order) {
    if (order < 0 || order > 2)
        throw std::invalid_argument("perturbative order must be 0, 1 or 2");
    const auto c = perturbative_components(m);
    double v = c.shot;
    if (order >= 1)
        v += c.first_order;
    if (order >= 2)
        v += c.sig1_sq + c.sig0_sig2;
    return v;
}

HeisenbergVariances heisenberg_variances(const ThreeModeModel& m) {
    const auto space = make_space(m);
    const auto L = build_generator(m);
    const auto S = signal_operator(m, 0);
    auto S1 = [&](const Vector& x) -> Vector { return S.apply(space, L.apply(space, x)) - L.apply(space, S.apply(space, x)); };
    const Vector psi = initial_state(m);
    const Vector s1 = S1(psi);
    const Vector s2 = 0.5 * (S1(L.apply(space, psi)) - L.apply(space, s1));
    HeisenbergVariances out;
    out.S1_sq = s1.squaredNorm();
    out.S2S0_sym = 2.0 * inner_real(S.apply(space, psi), s2);
    const Vector o1 = L.apply(space, psi);
    out.diagnostics = diagnose(m, space, {&psi, &o1});
    return out;
}

Matrix expm(const Matrix& M) {
    const double norm = M.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm > 0.5)
        s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Matrix A = M / std::ldexp(1.0, s);
    Matrix E = Matrix::Identity(M.rows(), M.cols());
    Matrix term = E;
    bool done = false;
    for (int k = 1; k <= 60; ++k) {
        term = term * A / static_cast<double>(k);
        E += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-18 * E.cwiseAbs().maxCoeff()) {
            done = true;
            break;
        }
    }
    if (!done)
        throw ExponentialError("Taylor series for the scaled exponential did not converge");
    for (int k = 0; k < s; ++k)
        E = E * E;
    return E;
}

ExactResult exact_variance(const ThreeModeModel& m) {
    if (m.channels != 1)
        throw std::invalid_argument("exact_variance supports the single-channel model");
    const auto space = make_space(m);
    const auto L = build_generator(m);
    const auto S = signal_operator(m, 0);
    const Vector psi = initial_state(m);

    // Blocks of constant n_p + n_N.
    std::map<int, std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const auto occ = space.occupation(i);
        blocks[occ[0] + occ[2]].push_back(i);
    }
    Vector out = Vector::Zero(psi.size());
    const auto n = static_cast<Eigen::Index>(space.dim());
    Vector e = Vector::Zero(n);
    for (const auto& [k, idx] : blocks) {
        const auto b = static_cast<Eigen::Index>(idx.size());
        Vector local(b);
        bool any = false;
        for (Eigen::Index r = 0; r < b; ++r) {
            local[r] = psi[static_cast<Eigen::Index>(idx[r])];
            any = any || local[r] != cplx(0.0);
        }
        if (!any)
            continue;
        Matrix Lb(b, b);
        for (Eigen::Index j = 0; j < b; ++j) {
            e[static_cast<Eigen::Index>(idx[j])] = 1.0;
            const Vector col = L.apply(space, e);
            e[static_cast<Eigen::Index>(idx[j])] = 0.0;
            for (Eigen::Index r = 0; r < b; ++r)
                Lb(r, j) = col[static_cast<Eigen::Index>(idx[r])];
        }
        const Vector evolved = expm(Lb) * local;
        for (Eigen::Index r = 0; r < b; ++r)
            out[static_cast<Eigen::Index>(idx[r])] = evolved[r];
    }
    ExactResult r;
    r.norm = out.norm();
    r.variance = S.apply(space, out).squaredNorm();
    r.diagnostics = diagnose(m, space, {&psi, &out});
    return r;
}

TwoChannelOracle two_channel_oracle(const ThreeModeModel& m) {
    if (m.channels != 2)
        throw std::invalid_argument("two_channel_oracle needs the two-channel model");
    const auto space = make_space(m);
    const auto L = build_generator(m);
    const auto S1 = signal_operator(m, 0), S2 = signal_operator(m, 1);
    const Vector psi = initial_state(m);
    const Vector o1 = L.apply(space, psi);
    const Vector o2 = 0.5 * L.apply(space, o1);
    TwoChannelOracle out;
    out.cross_sig1 = 2.0 * inner_real(S1.apply(space, o1), S2.apply(space, o1));
    out.cross_sig02 = 2.0 * (inner_real(S1.apply(space, psi), S2.apply(space, o2)) +
                             inner_real(S1.apply(space, o2), S2.apply(space, psi)));
    out.base_cross = std::abs(S1.apply(space, psi).dot(S2.apply(space, psi)));
    out.diagnostics = diagnose(m, space, {&psi, &o1, &o2});
    return out;
}

namespace closed_form {

double variance(cplx A, cplx C, cplx alpha) {
    const double a2 = std::norm(alpha);
    return a2 + (2.0 * std::norm(A) - 2.0 * (A * C).real()) * a2 * a2;
}

double sig1_sq(cplx A, cplx alpha) {
    const double a2 = std::norm(alpha);
    return std::norm(A) * a2 * (1.0 + 3.0 * a2);
}

double sig0_sig2(cplx A, cplx C, cplx alpha) {
    const double a2 = std::norm(alpha);
    return -std::norm(A) * a2 - (std::norm(A) + 2.0 * (A * C).real()) * a2 * a2;
}

double S1_sq(cplx A, cplx C, cplx alpha) {
    const double a2 = std::norm(alpha);
    const double k = std::norm(A) + std::norm(C) - 2.0 * (A * C).real();
    return k * (a2 + a2 * a2);
}

double S2S0_sym(cplx A, cplx C, cplx alpha) {
    const double a2 = std::norm(alpha);
    const double k = std::norm(A) + std::norm(C) - 2.0 * (A * C).real();
    return -k * a2 + (std::norm(A) - std::norm(C)) * a2 * a2;
}

double cross_sig1(cplx A1, cplx A2, cplx alpha1, cplx alpha2) {
    const double q = std::norm(alpha1 * alpha2);
    return 2.0 * (std::conj(A1) * A2 + A1 * std::conj(A2)).real() * q;
}

double cross_sig02(cplx A1, cplx A2, cplx C1, cplx C2, cplx alpha1, cplx alpha2) {
    const double q = std::norm(alpha1 * alpha2);
    return -(A1 * C2 + A2 * C1 + std::conj(A1) * std::conj(C2) + std::conj(A2) * std::conj(C1)).real() * q;
}

} // namespace closed_form

} // namespace eos::fock
