#pragma once
// Empirical measures, exact W1 transport, the pluripotency deficit, Birkhoff
// averages, and the three middle-word designers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "construction.hpp"

namespace hs {

struct Atom {
    double x, y, w;
};

struct EmpiricalMeasure {
    std::vector<Atom> atoms;
    std::size_t transit_excluded = 0;
    double total() const {
        double s = 0;
        for (const auto& a : atoms) s += a.w;
        return s;
    }
};

// Uniform weights on the given points; coincident points are merged.
inline EmpiricalMeasure uniform_measure(const std::vector<std::pair<double, double>>& pts) {
    std::map<std::pair<double, double>, std::size_t> count;
    for (const auto& p : pts) ++count[p];
    EmpiricalMeasure mu;
    for (const auto& [p, c] : count) mu.atoms.push_back({p.first, p.second, double(c) / double(pts.size())});
    return mu;
}

template <class T>
EmpiricalMeasure empirical(const OrbitSegment<T>& orbit, std::size_t n, bool include_transit = false) {
    if (orbit.samples.size() < n) throw Error(ErrorCode::OrbitTooShort, "orbit has fewer than n samples");
    std::vector<std::pair<double, double>> pts;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = orbit.samples[i];
        if (s.region == Region::Escaped) throw Error(ErrorCode::OrbitEscaped, "escape at tick " + std::to_string(s.tick));
        if (s.region == Region::TransitTick && !include_transit) {
            ++skipped;
            continue;
        }
        pts.push_back({to_double(s.point.x), to_double(s.point.y)});
    }
    EmpiricalMeasure mu = uniform_measure(pts);
    mu.transit_excluded = skipped;
    return mu;
}

inline double capped_distance(const Atom& a, const Atom& b) {
    return std::min(std::hypot(a.x - b.x, a.y - b.y), 2.0);
}

// Exact transport cost with ground distance min(d, 2). Successive shortest
// paths, one source at a time; residual paths alternate sink -> source -> sink,
// so they are searched on a compressed graph over the sinks only.
inline double wasserstein1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    const bool swap = mu.atoms.size() < nu.atoms.size();
    const auto& src = swap ? nu.atoms : mu.atoms;
    const auto& snk = swap ? mu.atoms : nu.atoms;
    const std::size_t n = src.size(), m = snk.size();
    if (n == 0 || m == 0) return 0.0;
    constexpr double tol = 1e-15;
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> demand(m);
    for (std::size_t j = 0; j < m; ++j) demand[j] = snk[j].w;
    std::vector<std::vector<std::pair<std::size_t, double>>> out_flow(n); // per source: (sink, amount)
    std::vector<std::vector<std::size_t>> in_sources(m);                 // per sink, rebuilt each round
    auto cost = [&](std::size_t i, std::size_t j) { return capped_distance(src[i], snk[j]); };
    auto flow_ref = [&](std::size_t i, std::size_t j) -> double& {
        for (auto& f : out_flow[i])
            if (f.first == j) return f.second;
        out_flow[i].push_back({j, 0.0});
        return out_flow[i].back().second;
    };
    auto flow_of = [&](std::size_t i, std::size_t j) {
        for (const auto& f : out_flow[i])
            if (f.first == j) return f.second;
        return 0.0;
    };

    std::vector<double> w(m * m);
    std::vector<std::size_t> via(m * m);
    std::vector<double> dist(m);
    std::vector<long> pred(m), pred_src(m);

    for (std::size_t i = 0; i < n; ++i) {
        double supply = src[i].w;
        while (supply > tol) {
            for (auto& lst : in_sources) lst.clear();
            for (std::size_t s = 0; s < n; ++s)
                for (const auto& f : out_flow[s])
                    if (f.second > tol) in_sources[f.first].push_back(s);
            for (std::size_t j = 0; j < m; ++j) {
                const auto& lst = in_sources[j];
                for (std::size_t j2 = 0; j2 < m; ++j2) {
                    w[j * m + j2] = inf;
                    if (j2 == j) continue;
                    for (std::size_t s : lst) {
                        double c = cost(s, j2) - cost(s, j);
                        if (c < w[j * m + j2]) {
                            w[j * m + j2] = c;
                            via[j * m + j2] = s;
                        }
                    }
                }
            }
            for (std::size_t j = 0; j < m; ++j) {
                dist[j] = cost(i, j);
                pred[j] = -1;
            }
            for (std::size_t pass = 0; pass + 1 < m; ++pass) {
                bool changed = false;
                for (std::size_t j = 0; j < m; ++j)
                    for (std::size_t j2 = 0; j2 < m; ++j2) {
                        double c = w[j * m + j2];
                        if (c == inf) continue;
                        if (dist[j] + c < dist[j2] - 1e-13) {
                            dist[j2] = dist[j] + c;
                            pred[j2] = long(j);
                            pred_src[j2] = long(via[j * m + j2]);
                            changed = true;
                        }
                    }
                if (!changed) break;
            }
            long t = -1;
            for (std::size_t j = 0; j < m; ++j)
                if (demand[j] > tol && (t < 0 || dist[j] < dist[std::size_t(t)])) t = long(j);
            if (t < 0) break; // rounding leftovers
            double amount = std::min(supply, demand[std::size_t(t)]);
            for (long j = t; pred[std::size_t(j)] >= 0; j = pred[std::size_t(j)])
                amount = std::min(amount, flow_of(std::size_t(pred_src[std::size_t(j)]), std::size_t(pred[std::size_t(j)])));
            long j = t;
            while (pred[std::size_t(j)] >= 0) {
                std::size_t s = std::size_t(pred_src[std::size_t(j)]), from = std::size_t(pred[std::size_t(j)]);
                flow_ref(s, from) -= amount;
                flow_ref(s, std::size_t(j)) += amount;
                j = long(from);
            }
            flow_ref(i, std::size_t(j)) += amount;
            supply -= amount;
            demand[std::size_t(t)] -= amount;
        }
    }
    double total = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& f : out_flow[i])
            if (f.second > 0) total += f.second * cost(i, f.first);
    return total;
}

// ------------------------------------------------------------------ designs

struct CodeDesign {
    std::string mode;
    std::vector<Word> v_hats;
    std::vector<std::size_t> alpha, beta; // index k-1
    double coverage = 0;
    std::vector<int> era_of_k;            // historic designs only
    std::vector<double> dominance;        // era ratios, s = 1..
};

// alpha_k = sum_{i<k} (n_i + 2) + u_hat_k and beta_k = m_hat_k.
inline void layout(const ChainSpec& spec, CodeDesign& d) {
    std::size_t offset = 0;
    d.alpha.clear();
    d.beta.clear();
    for (const auto& e : spec.entries) {
        d.alpha.push_back(offset + e.u_hat);
        d.beta.push_back(e.m_hat);
        offset += e.n + 2;
    }
    std::size_t covered = 0;
    for (auto b : d.beta) covered += b;
    d.coverage = d.alpha.empty() ? 0.0 : double(covered) / double(d.alpha.back() + d.beta.back());
}

// `symbol(j)` is the j-th symbol (1-based) of the target stream.
inline CodeDesign design_target_code(const std::function<char(std::size_t)>& symbol, const ChainSpec& spec) {
    CodeDesign d;
    d.mode = "target";
    layout(spec, d);
    for (std::size_t k = 0; k < spec.K(); ++k) {
        Word v;
        for (std::size_t j = d.alpha[k] + 1; j <= d.alpha[k] + d.beta[k]; ++j) v.push_back(symbol(j));
        if (v.size() != spec.entries[k].m_hat || !valid_word(v))
            throw Error(ErrorCode::LengthMismatch, "target stream produced a bad block at k=" + std::to_string(k + 1));
        d.v_hats.push_back(std::move(v));
    }
    return d;
}

inline std::function<char(std::size_t)> periodic_stream(const Word& w) {
    if (w.empty() || !valid_word(w)) throw Error(ErrorCode::LengthMismatch, "periodic word must be a nonempty binary word");
    return [w](std::size_t j) { return w[(j - 1) % w.size()]; };
}

inline CodeDesign design_dirac_code(const Word& periodic, const ChainSpec& spec) {
    if (periodic.empty() || !valid_word(periodic)) throw Error(ErrorCode::LengthMismatch, "periodic word must be nonempty");
    CodeDesign d;
    d.mode = "dirac";
    layout(spec, d);
    for (const auto& e : spec.entries) {
        Word v;
        for (std::size_t j = 0; j < e.m_hat; ++j) v.push_back(periodic[j % periodic.size()]);
        d.v_hats.push_back(std::move(v));
    }
    return d;
}

// Era index of chain point k: largest s with k_s <= k, 0 before the first era.
inline int era_of(const std::vector<int>& eras, int k) {
    int s = 0;
    for (std::size_t i = 0; i < eras.size(); ++i)
        if (eras[i] <= k) s = int(i) + 1;
    return s;
}

inline Word historic_word(std::size_t m, bool even) {
    std::size_t zeros = even ? m / 3 : (2 * m) / 3;
    return Word(zeros, '0') + Word(m - zeros, '1');
}

// First s whose era fails sum_{k_s <= k < k_{s+1}} m_k > s * sum_{k < k_s} m_k.
inline std::optional<int> era_violation(const std::vector<int>& eras, const std::function<std::size_t(int)>& m_hat,
                                        std::vector<double>* dominance = nullptr) {
    for (std::size_t i = 0; i + 1 < eras.size(); ++i) {
        if (eras[i + 1] <= eras[i] || eras[i] < 1) return int(i) + 1;
        const long s = long(i) + 1;
        std::size_t before = 0, era = 0;
        for (int k = 1; k < eras[i]; ++k) before += m_hat(k);
        for (int k = eras[i]; k < eras[i + 1]; ++k) era += m_hat(k);
        if (dominance) dominance->push_back(before == 0 ? INFINITY : double(era) / double(before));
        if (!(era > std::size_t(s) * before)) return int(s);
    }
    return std::nullopt;
}

// Least schedule k_1 < k_2 < ... satisfying the era condition.
inline std::vector<int> minimal_era_schedule(int k1, int count, const std::function<std::size_t(int)>& m_hat) {
    std::vector<int> eras{k1};
    while (int(eras.size()) < count) {
        const long s = long(eras.size());
        std::size_t before = 0;
        for (int k = 1; k < eras.back(); ++k) before += m_hat(k);
        std::size_t era = 0;
        int k = eras.back();
        do era += m_hat(k++);
        while (!(era > std::size_t(s) * before));
        eras.push_back(k);
    }
    return eras;
}

inline CodeDesign design_historic_code(const std::vector<int>& eras, const ChainSpec& spec) {
    CodeDesign d;
    d.mode = "historic";
    layout(spec, d);
    auto m_hat = [&](int k) {
        if (k >= 1 && std::size_t(k) <= spec.K()) return spec.entries[std::size_t(k) - 1].m_hat;
        return std::size_t(k + spec.translation) * std::size_t(k + spec.translation);
    };
    if (auto bad = era_violation(eras, m_hat, &d.dominance))
        throw Error(ErrorCode::EraConditionViolated, "era s=" + std::to_string(*bad));
    for (const auto& e : spec.entries) {
        int s = era_of(eras, e.k);
        d.era_of_k.push_back(s);
        d.v_hats.push_back(historic_word(e.m_hat, s % 2 == 0));
    }
    return d;
}

// --------------------------------------------------------------- observables

using Observable = std::function<double(double x, double y)>;

// Indicator of the strip S_c, smoothed by the bump with the given margin.
template <class T>
Observable strip_indicator(const Model<T>& m, int c, double margin = 0.01, bool raw = false) {
    const double w = to_double(m.inv_sigma);
    const double center = c == 0 ? -0.5 : 0.5;
    const double a = center - w, b = center + w;
    if (raw) return [a, b](double x, double) { return (x >= a && x <= b) ? 1.0 : 0.0; };
    const double rho = margin / (b - a);
    return [a, b, rho](double x, double) { return eval_bump(x, rho, a, b); };
}

struct BirkhoffResult {
    std::vector<double> averages;
    double gap = 0;
};

inline BirkhoffResult oscillation_of(std::vector<double> averages) {
    BirkhoffResult r;
    r.averages = std::move(averages);
    if (!r.averages.empty()) {
        auto [lo, hi] = std::minmax_element(r.averages.begin(), r.averages.end());
        r.gap = *hi - *lo;
    }
    return r;
}

// Running averages at the given ticks; the starting point is not part of an
// OrbitSegment, so averages run over samples with tick <= checkpoint.
template <class T>
BirkhoffResult birkhoff_oscillation(const OrbitSegment<T>& orbit, const Observable& f, const std::vector<long>& checkpoints,
                                    bool include_transit = false) {
    std::vector<double> avgs;
    double sum = 0;
    std::size_t count = 0, next = 0;
    for (const auto& s : orbit.samples) {
        while (next < checkpoints.size() && s.tick > checkpoints[next]) {
            avgs.push_back(count ? sum / double(count) : 0.0);
            ++next;
        }
        if (s.region == Region::Escaped) break;
        if (s.region == Region::TransitTick && !include_transit) continue;
        sum += f(to_double(s.point.x), to_double(s.point.y));
        ++count;
    }
    while (next < checkpoints.size()) {
        avgs.push_back(count ? sum / double(count) : 0.0);
        ++next;
    }
    return oscillation_of(std::move(avgs));
}

// Streams the orbit of p0 under g for `ticks` ticks (tick 0 included) and
// reports averages of each observable after the given ticks.
template <class T>
std::vector<BirkhoffResult> simulate_birkhoff(const System<T>& sys, Point<T> p0, long ticks,
                                              const std::vector<Observable>& obs, const std::vector<long>& checkpoints) {
    std::vector<double> sums(obs.size(), 0.0);
    std::vector<std::vector<double>> avgs(obs.size());
    std::size_t count = 0, next = 0;
    auto add = [&](const Point<T>& p) {
        double x = to_double(p.x), y = to_double(p.y);
        for (std::size_t i = 0; i < obs.size(); ++i) sums[i] += obs[i](x, y);
        ++count;
    };
    auto record_until = [&](long tick) {
        while (next < checkpoints.size() && checkpoints[next] <= tick) {
            for (std::size_t i = 0; i < obs.size(); ++i) avgs[i].push_back(sums[i] / double(count));
            ++next;
        }
    };
    Point<T> p = p0;
    add(p);
    record_until(0);
    long t = 0;
    while (t < ticks) {
        Step<T> s = step(sys, p);
        if (s.region == Region::Escaped) throw Error(ErrorCode::OrbitEscaped, "escape at tick " + std::to_string(t + 1));
        t += s.ticks(); // the transit tick is counted in time, not in the averages
        p = s.next;
        if (t > ticks) break;
        add(p);
        record_until(t);
    }
    std::vector<BirkhoffResult> out;
    for (auto& a : avgs) out.push_back(oscillation_of(std::move(a)));
    return out;
}

// ------------------------------------------------------------------ deficit

struct DeficitResult {
    std::vector<long> ticks;       // included ticks
    std::vector<double> sup;       // per included tick
    std::vector<double> series;    // Cesaro averages after each included tick
    std::vector<std::vector<std::pair<double, double>>> tracked; // orbits of tracked samples
    std::vector<std::pair<double, double>> shadow;
    std::size_t transit_excluded = 0;

    // Series value after all ticks <= tick.
    double at(long tick) const {
        auto it = std::upper_bound(ticks.begin(), ticks.end(), tick);
        if (it == ticks.begin()) return 0.0;
        return series[std::size_t(it - ticks.begin()) - 1];
    }
    std::size_t count_until(long tick) const {
        return std::size_t(std::upper_bound(ticks.begin(), ticks.end(), tick) - ticks.begin());
    }
};

// Cesaro averages of sup_y dist(g^i(y), f^i(x_g)) for ticks i = 0..n-1, where
// x_g has forward code shadow_word repeated. Transit ticks are dropped for
// both orbits.
template <class T>
DeficitResult pluripotency_deficit(const std::vector<Point<T>>& samples, const Word& shadow_word, long n,
                                   const System<T>& sys, const std::vector<std::size_t>& track = {}) {
    DeficitResult r;
    std::vector<Point<T>> shadow_pts;
    for (std::size_t i = 0; i < shadow_word.size(); ++i)
        shadow_pts.push_back(decode_periodic(rotate_word(shadow_word, i), sys.model));
    struct State {
        Point<T> p;
        std::optional<Point<T>> landing;
    };
    std::vector<State> st;
    for (const auto& s : samples) st.push_back({s, std::nullopt});
    r.tracked.resize(track.size());
    double sum = 0;
    for (long tick = 0; tick < n; ++tick) {
        bool transit = false;
        if (tick > 0) {
            for (std::size_t j = 0; j < st.size(); ++j) {
                auto& s = st[j];
                if (s.landing) {
                    s.p = *s.landing;
                    s.landing.reset();
                    continue;
                }
                Step<T> stp = step(sys, s.p);
                if (stp.region == Region::Escaped)
                    throw Error(ErrorCode::SampleEscaped, "sample " + std::to_string(j) + " at tick " + std::to_string(tick));
                if (stp.region == Region::TangencyWindow) {
                    s.p = stp.transit;
                    s.landing = stp.next;
                    transit = true;
                } else {
                    s.p = stp.next;
                }
            }
        }
        if (transit) {
            ++r.transit_excluded;
            continue;
        }
        const Point<T>& xg = shadow_pts[std::size_t(tick) % shadow_pts.size()];
        double worst = 0;
        for (const auto& s : st) worst = std::max(worst, to_double(distance(s.p, xg)));
        sum += worst;
        r.ticks.push_back(tick);
        r.sup.push_back(worst);
        r.series.push_back(sum / double(r.ticks.size()));
        for (std::size_t k = 0; k < track.size(); ++k)
            r.tracked[k].push_back({to_double(st[track[k]].p.x), to_double(st[track[k]].p.y)});
        r.shadow.push_back({to_double(xg.x), to_double(xg.y)});
    }
    return r;
}

// Strictly decreasing series on [from + q, to - q].
inline bool trending_down(const DeficitResult& r, long from, long to, long q = 16) {
    std::size_t a = r.count_until(from + q), b = r.count_until(to - q);
    if (b <= a + 1) return false;
    for (std::size_t i = a; i + 1 < b; ++i)
        if (!(r.series[i + 1] < r.series[i])) return false;
    return true;
}

inline void write_series_csv(std::ostream& os, const DeficitResult& r, const std::vector<double>& w1 = {},
                             const std::vector<std::vector<double>>& birkhoff = {}) {
    os << "n,deficit,W1_to_shadow";
    for (std::size_t i = 0; i < birkhoff.size(); ++i) os << ",birkhoff_avg_" << i;
    os << '\n';
    for (std::size_t i = 0; i < r.ticks.size(); ++i) {
        os << r.ticks[i] + 1 << ',' << format_double(r.series[i]) << ',';
        if (i < w1.size() && !std::isnan(w1[i])) os << format_double(w1[i]);
        for (const auto& b : birkhoff) os << ',' << (i < b.size() ? format_double(b[i]) : "");
        os << '\n';
    }
}

} // namespace hs
