#pragma once
// End-to-end drivers: linked pairs -> chain spec -> critical chain -> cascade,
// and the three orbit experiments on top of it.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "statistics.hpp"

namespace hs {

struct PipelineOptions {
    Params params;
    Rational epsilon{1, 1000};
    double kappa = 2.5;
    double eta = 0.075;
    int N = 0;            // 0: ceil(N_s)
    int K = 3;
    int translation = -1; // -1: smallest admissible
    Rational rho{1, 1000};
    int refinements = 2;
};

inline int chain_N(const PipelineOptions& o) {
    return o.N > 0 ? o.N : int(std::ceil(Derived(o.params).N_s(o.kappa)));
}

// Everything computed exactly before a backend is chosen.
struct Skeleton {
    InitialPair<Rational> initial;
    LinearGrowth<Rational> growth;
    ChainSkeleton<Rational> bridges;
    std::vector<Interval<Rational>> supports; // native stable intervals of B^s_k
    ChainSpec spec;                           // zero middle words
};

inline Skeleton skeleton_from_growth(InitialPair<Rational> initial, LinearGrowth<Rational> growth,
                                     const PipelineOptions& o) {
    Skeleton s{std::move(initial), std::move(growth), {}, {}, {}};
    Model<Rational> mf = Model<Rational>(o.params).with_slide(s.growth.slide);
    s.bridges = find_chain_bridges(s.growth.pairs, chain_N(o), o.params, mf);
    for (const auto& pr : s.growth.pairs) s.supports.push_back(pr.bs.native());
    s.spec = assemble_chain_spec(s.bridges, o.K, o.translation, o.eta, o.params);
    return s;
}

inline Skeleton build_skeleton(const PipelineOptions& o) {
    Model<Rational> m(o.params);
    InitialPair<Rational> ip = initial_linked_pair(o.params, m, o.refinements);
    LinearGrowth<Rational> lg = linear_growth(ip.pair, o.epsilon, o.K + 1, o.params, m, o.kappa);
    return skeleton_from_growth(std::move(ip), std::move(lg), o);
}

template <class T>
struct ChainRun {
    ChainSpec spec;
    CriticalChain<T> chain;
    SpecChecks spec_checks;
    std::vector<LegCheck> legs;
    ZetaCheck zeta;
    std::optional<RectangleCascade<T>> cascade;

    bool legs_ok() const {
        return std::all_of(legs.begin(), legs.end(), [](const LegCheck& l) { return l.pass; });
    }
};

template <class T>
ChainRun<T> run_chain(const Skeleton& sk, ChainSpec spec, const PipelineOptions& o, bool with_cascade) {
    ChainRun<T> r;
    r.spec = std::move(spec);
    r.spec_checks = check_spec(r.spec);
    r.chain = critical_chain<T>(r.spec, sk.supports, o.params, sk.growth.slide, o.kappa);
    r.legs = verify_chain(r.chain, r.spec);
    r.zeta = check_zeta(r.chain, r.spec, o.params);
    if (with_cascade) r.cascade = rectangle_cascade(r.chain, r.spec, o.params, o.rho);
    return r;
}

inline double unit_draw(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// Center, a boundary ring, and seeded interior points of R.
template <class T>
std::vector<Point<T>> rectangle_sample_set(const Rectangle<T>& R, std::size_t count, std::uint64_t seed) {
    std::vector<Point<T>> pts = rectangle_samples(R, 8);
    if (pts.size() > count) pts.resize(count);
    std::mt19937_64 rng(seed);
    const T hw = R.width / T(2), hh = R.height / T(2);
    while (pts.size() < count) {
        double u = 2 * unit_draw(rng) - 1, v = 2 * unit_draw(rng) - 1;
        pts.push_back({R.center.x + T(u) * hw, R.center.y + T(v) * hh});
    }
    return pts;
}

// Tick after the last designed symbol.
inline long design_horizon(const CodeDesign& d) { return long(d.alpha.back() + d.beta.back()); }

inline long full_horizon(const ChainSpec& spec) {
    long h = 0;
    for (const auto& e : spec.entries) h += long(e.n) + 2;
    return h;
}

template <class T>
struct DeficitExperiment {
    ChainRun<T> run;
    CodeDesign design;
    Word target;
    long horizon = 0;
    DeficitResult deficit;
    std::vector<long> checkpoints;
    std::vector<std::vector<double>> w1; // [tracked sample][checkpoint]
    bool w1_ok = true;
    bool trend_ok = false;
    double final_value = 0;
};

// Samples of R_1 shadowing the periodic target code.
template <class T>
DeficitExperiment<T> deficit_experiment(const Skeleton& sk, const PipelineOptions& o, const Word& target,
                                        std::size_t samples, std::uint64_t seed, std::size_t tracked = 4) {
    DeficitExperiment<T> ex;
    ex.target = target;
    ex.design = design_target_code(periodic_stream(target), sk.spec);
    ChainSpec spec = sk.spec;
    apply_design(spec, ex.design.v_hats);
    ex.run = run_chain<T>(sk, spec, o, true);
    require_inclusions(*ex.run.cascade);
    ex.horizon = design_horizon(ex.design);

    std::vector<Point<T>> pts = rectangle_sample_set(ex.run.cascade->rects.front(), samples, seed);
    std::vector<std::size_t> track;
    for (std::size_t i = 0; i < std::min(tracked, pts.size()); ++i) track.push_back(i * pts.size() / tracked);
    ex.deficit = pluripotency_deficit(pts, target, ex.horizon, ex.run.chain.system(), track);
    ex.final_value = ex.deficit.series.empty() ? 0.0 : ex.deficit.series.back();

    const std::size_t K = ex.design.alpha.size();
    ex.trend_ok = trending_down(ex.deficit, long(ex.design.alpha[K - 1]), ex.horizon - 1);
    for (std::size_t k = 0; k < K; ++k) ex.checkpoints.push_back(long(ex.design.alpha[k] + ex.design.beta[k]) - 1);
    ex.w1.assign(track.size(), {});
    for (std::size_t s = 0; s < track.size(); ++s)
        for (long cp : ex.checkpoints) {
            std::size_t c = ex.deficit.count_until(cp);
            std::vector<std::pair<double, double>> a(ex.deficit.tracked[s].begin(), ex.deficit.tracked[s].begin() + long(c));
            std::vector<std::pair<double, double>> b(ex.deficit.shadow.begin(), ex.deficit.shadow.begin() + long(c));
            double w = wasserstein1(uniform_measure(a), uniform_measure(b));
            ex.w1[s].push_back(w);
            ex.w1_ok = ex.w1_ok && w <= ex.deficit.at(cp) + 1e-12;
        }
    return ex;
}

template <class T>
struct BirkhoffExperiment {
    ChainRun<T> run;
    CodeDesign design;
    long horizon = 0;
    std::vector<long> checkpoints;
    BirkhoffResult s0, s1; // smoothed strip indicators
};

template <class T>
BirkhoffExperiment<T> birkhoff_experiment(const Skeleton& sk, const PipelineOptions& o, CodeDesign design,
                                          std::vector<long> checkpoints, long horizon) {
    BirkhoffExperiment<T> ex;
    ex.design = std::move(design);
    ChainSpec spec = sk.spec;
    apply_design(spec, ex.design.v_hats);
    ex.run = run_chain<T>(sk, spec, o, false);
    ex.horizon = horizon;
    ex.checkpoints = std::move(checkpoints);
    const Model<T>& m = ex.run.chain.model;
    auto res = simulate_birkhoff(ex.run.chain.system(), ex.run.chain.points.front().x, horizon,
                                 {strip_indicator(m, 0), strip_indicator(m, 1)}, ex.checkpoints);
    ex.s0 = res[0];
    ex.s1 = res[1];
    return ex;
}

// Period-w design observed at the end of the orbit, horizon sum(n_k + 2).
template <class T>
BirkhoffExperiment<T> dirac_experiment(const Skeleton& sk, const PipelineOptions& o, const Word& periodic) {
    CodeDesign d = design_dirac_code(periodic, sk.spec);
    long h = full_horizon(sk.spec);
    return birkhoff_experiment<T>(sk, o, std::move(d), {h - 1}, h);
}

// Checkpoints at the last designed tick of each completed era.
template <class T>
BirkhoffExperiment<T> historic_experiment(const Skeleton& sk, const PipelineOptions& o, const std::vector<int>& eras) {
    CodeDesign d = design_historic_code(eras, sk.spec);
    std::vector<long> cps;
    for (std::size_t i = 1; i < eras.size(); ++i) {
        int last_k = eras[i] - 1;
        if (last_k < 1 || std::size_t(last_k) > d.alpha.size()) continue;
        cps.push_back(long(d.alpha[std::size_t(last_k) - 1] + d.beta[std::size_t(last_k) - 1]) - 1);
    }
    if (cps.empty()) throw Error(ErrorCode::EraConditionViolated, "no era completes within the chain");
    long h = cps.back() + 1;
    return birkhoff_experiment<T>(sk, o, std::move(d), std::move(cps), h);
}

} // namespace hs
