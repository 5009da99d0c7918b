#include "relaybound/pareto.hpp"

#include "relaybound/parallel.hpp"
#include "relaybound/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace relaybound {

bool dominates(std::span<const double> a, std::span<const double> b, std::span<const Sense> senses)
{
    if (a.size() != b.size() || a.size() != senses.size()) {
        throw std::invalid_argument("dominates: arity mismatch");
    }
    bool strict = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double better = senses[k] == Sense::Maximize ? a[k] - b[k] : b[k] - a[k];
        if (better < 0.0) {
            return false;
        }
        strict = strict || better > 0.0;
    }
    return strict;
}

std::vector<std::size_t> pareto_filter(const std::vector<std::vector<double>>& points, std::span<const Sense> senses)
{
    // Visit points best-first on the first axis (ties broken lexicographically);
    // a point can only be dominated by one visited before it, so it suffices
    // to compare against the non-dominated points kept so far.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](std::size_t i, std::size_t k) {
        return senses[k] == Sense::Maximize ? -points[i][k] : points[i][k];
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (std::size_t k = 0; k < senses.size(); ++k) {
            if (key(a, k) != key(b, k)) {
                return key(a, k) < key(b, k);
            }
        }
        return a < b;
    });
    std::vector<std::size_t> kept;
    for (std::size_t i : order) {
        const bool beaten = std::any_of(kept.begin(), kept.end(),
                                        [&](std::size_t j) { return dominates(points[j], points[i], senses); });
        if (!beaten) {
            kept.push_back(i);
        }
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::string to_string(BoundKind kind)
{
    switch (kind) {
    case BoundKind::B_opt:
        return "B_opt";
    case BoundKind::B_c:
        return "B_c";
    case BoundKind::B_r:
        return "B_r";
    case BoundKind::B_c_opt:
        return "B_c_opt";
    case BoundKind::B_r_opt:
        return "B_r_opt";
    }
    return "?";
}

BoundKind parse_bound_kind(const std::string& name)
{
    for (auto k : {BoundKind::B_opt, BoundKind::B_c, BoundKind::B_r, BoundKind::B_c_opt, BoundKind::B_r_opt}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown bound kind '" + name + "'");
}

std::vector<std::vector<double>> ParetoBound::points() const
{
    std::vector<std::vector<double>> out;
    out.reserve(entries.size());
    for (const auto& e : entries) {
        out.push_back(e.point);
    }
    return out;
}

std::vector<Sense> bopt_senses() { return {Sense::Maximize, Sense::Minimize, Sense::Minimize}; }

std::vector<double> bopt_point(const ObjectiveVector& o) { return {o.f_C, o.f_D, o.f_E}; }

Evaluator analytic_evaluator(const StudyCase& sc, const ChannelParams& channel, double d_sd)
{
    return [sc, channel, d_sd](std::span<const double> genome) {
        Candidate c;
        c.solution = decode_genome(genome, sc, channel, d_sd);
        c.feasible = c.solution.feasible;
        c.violation = c.solution.violation;
        if (c.feasible) {
            try {
                c.objectives = evaluate(c.solution, sc);
            } catch (const std::domain_error&) {
                c.feasible = false;
                c.violation = HUGE_VAL;
            }
        }
        return c;
    };
}

namespace {

struct Member {
    std::vector<double> genome;
    Candidate eval;
    std::vector<double> min_obj; // objectives, all minimized
    std::uint64_t id = 0;
    int rank = 0;
    double crowding = 0.0;
};

// Feasible beats infeasible; infeasible ordered by violation; feasible by
// Pareto dominance on the minimized objectives.
bool constrained_dominates(const Member& a, const Member& b)
{
    if (a.eval.feasible != b.eval.feasible) {
        return a.eval.feasible;
    }
    if (!a.eval.feasible) {
        return a.eval.violation < b.eval.violation;
    }
    static const std::vector<Sense> all_min(3, Sense::Minimize);
    return dominates(a.min_obj, b.min_obj, all_min);
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::vector<Member>& pop)
{
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> beats(n);
    std::vector<int> beaten_by(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (constrained_dominates(pop[i], pop[j])) {
                beats[i].push_back(j);
                ++beaten_by[j];
            } else if (constrained_dominates(pop[j], pop[i])) {
                beats[j].push_back(i);
                ++beaten_by[i];
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (beaten_by[i] == 0) {
            current.push_back(i);
        }
    }
    int rank = 0;
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current) {
            pop[i].rank = rank;
            for (std::size_t j : beats[i]) {
                if (--beaten_by[j] == 0) {
                    next.push_back(j);
                }
            }
        }
        fronts.push_back(std::move(current));
        current = std::move(next);
        ++rank;
    }
    return fronts;
}

void assign_crowding(std::vector<Member>& pop, const std::vector<std::size_t>& front)
{
    for (std::size_t i : front) {
        pop[i].crowding = 0.0;
    }
    if (front.empty()) {
        return;
    }
    const std::size_t m = pop[front.front()].min_obj.size();
    std::vector<std::size_t> idx = front;
    for (std::size_t k = 0; k < m; ++k) {
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return pop[a].min_obj[k] != pop[b].min_obj[k] ? pop[a].min_obj[k] < pop[b].min_obj[k] : a < b;
        });
        const double lo = pop[idx.front()].min_obj[k];
        const double hi = pop[idx.back()].min_obj[k];
        pop[idx.front()].crowding = HUGE_VAL;
        pop[idx.back()].crowding = HUGE_VAL;
        if (!(hi > lo) || !std::isfinite(hi - lo)) {
            continue;
        }
        for (std::size_t r = 1; r + 1 < idx.size(); ++r) {
            pop[idx[r]].crowding += (pop[idx[r + 1]].min_obj[k] - pop[idx[r - 1]].min_obj[k]) / (hi - lo);
        }
    }
}

bool crowded_better(const Member& a, const Member& b)
{
    return a.rank != b.rank ? a.rank < b.rank : a.crowding > b.crowding;
}

void sbx(std::vector<double>& c1, std::vector<double>& c2, const GenomeBounds& b, double eta, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t k = 0; k < c1.size(); ++k) {
        const double lo = b.lower[k];
        const double hi = b.upper[k];
        if (u01(rng) > 0.5 || !(hi > lo) || std::abs(c1[k] - c2[k]) < 1e-14) {
            continue;
        }
        const double y1 = std::min(c1[k], c2[k]);
        const double y2 = std::max(c1[k], c2[k]);
        const double r = u01(rng);
        auto child = [&](double beta) {
            const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
            const double bq = r <= 1.0 / alpha ? std::pow(r * alpha, 1.0 / (eta + 1.0))
                                               : std::pow(1.0 / (2.0 - r * alpha), 1.0 / (eta + 1.0));
            return bq;
        };
        const double bq1 = child(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
        const double bq2 = child(1.0 + 2.0 * (hi - y2) / (y2 - y1));
        double v1 = std::clamp(0.5 * ((y1 + y2) - bq1 * (y2 - y1)), lo, hi);
        double v2 = std::clamp(0.5 * ((y1 + y2) + bq2 * (y2 - y1)), lo, hi);
        if (u01(rng) <= 0.5) {
            std::swap(v1, v2);
        }
        c1[k] = v1;
        c2[k] = v2;
    }
}

void polynomial_mutation(std::vector<double>& g, const GenomeBounds& b, double prob, double eta, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double lo = b.lower[k];
        const double hi = b.upper[k];
        if (u01(rng) >= prob || !(hi > lo)) {
            continue;
        }
        const double span = hi - lo;
        const double d1 = (g[k] - lo) / span;
        const double d2 = (hi - g[k]) / span;
        const double r = u01(rng);
        const double pw = 1.0 / (eta + 1.0);
        double dq;
        if (r < 0.5) {
            const double v = 2.0 * r + (1.0 - 2.0 * r) * std::pow(1.0 - d1, eta + 1.0);
            dq = std::pow(v, pw) - 1.0;
        } else {
            const double v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(1.0 - d2, eta + 1.0);
            dq = 1.0 - std::pow(v, pw);
        }
        g[k] = std::clamp(g[k] + dq * span, lo, hi);
    }
}

void evaluate_all(std::vector<Member>& pop, std::size_t from, const Evaluator& evaluator, int jobs)
{
    parallel_for(pop.size() - from, jobs, [&](std::size_t i) {
        auto& m = pop[from + i];
        m.eval = evaluator(m.genome);
        if (m.eval.feasible) {
            m.min_obj = {-m.eval.objectives.f_C, m.eval.objectives.f_D, m.eval.objectives.f_E};
        } else {
            m.min_obj.assign(3, HUGE_VAL);
        }
    });
}

GenerationSnapshot snapshot(int gen, const std::vector<Member>& pop, const std::vector<std::size_t>& first_front)
{
    GenerationSnapshot s;
    s.generation = gen;
    for (const auto& m : pop) {
        s.population.push_back(bopt_point(m.eval.objectives));
        s.ids.push_back(m.id);
    }
    for (std::size_t i : first_front) {
        if (pop[i].eval.feasible) {
            s.front.push_back(i);
        }
    }
    return s;
}

} // namespace

ParetoBound nsga2(const StudyCase& sc, double d_sd, const Nsga2Config& cfg, const Evaluator& evaluator)
{
    if (cfg.population < 2 || cfg.generations < 0) {
        throw std::invalid_argument("nsga2: population must be >= 2 and generations >= 0");
    }
    const GenomeBounds bounds = cfg.bounds ? *cfg.bounds : genome_bounds(sc, d_sd);
    const std::size_t len = bounds.lower.size();
    if (len != sc.genome_length() || bounds.upper.size() != len) {
        throw std::invalid_argument("nsga2: genome bounds do not match study case " + std::to_string(sc.id));
    }
    const auto n = std::size_t(cfg.population);
    const double pm = cfg.mutation_prob < 0.0 ? 1.0 / double(len) : cfg.mutation_prob;

    std::uint64_t next_id = 0;
    std::vector<Member> pop(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = stream_rng(cfg.seed, 0, i);
        pop[i].genome.resize(len);
        for (std::size_t k = 0; k < len; ++k) {
            pop[i].genome[k] = bounds.upper[k] > bounds.lower[k]
                ? std::uniform_real_distribution<double>(bounds.lower[k], bounds.upper[k])(rng)
                : bounds.lower[k];
        }
        pop[i].id = next_id++;
    }
    evaluate_all(pop, 0, evaluator, cfg.jobs);
    auto fronts = nondominated_sort(pop);
    for (const auto& f : fronts) {
        assign_crowding(pop, f);
    }
    if (cfg.observer) {
        cfg.observer(snapshot(0, pop, fronts.front()));
    }

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        // Variation: one stream per offspring pair.
        const std::size_t pairs = (n + 1) / 2;
        std::vector<Member> offspring(2 * pairs);
        for (std::size_t p = 0; p < pairs; ++p) {
            auto rng = stream_rng(cfg.seed, std::uint64_t(gen), p);
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            auto tournament = [&]() -> const Member& {
                const auto& a = pop[pick(rng)];
                const auto& b = pop[pick(rng)];
                return crowded_better(b, a) ? b : a;
            };
            auto c1 = tournament().genome;
            auto c2 = tournament().genome;
            if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.crossover_prob) {
                sbx(c1, c2, bounds, cfg.crossover_eta, rng);
            }
            polynomial_mutation(c1, bounds, pm, cfg.mutation_eta, rng);
            polynomial_mutation(c2, bounds, pm, cfg.mutation_eta, rng);
            offspring[2 * p].genome = std::move(c1);
            offspring[2 * p + 1].genome = std::move(c2);
        }
        offspring.resize(n);
        for (auto& o : offspring) {
            o.id = next_id++;
        }
        const std::size_t from = pop.size();
        pop.insert(pop.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
        evaluate_all(pop, from, evaluator, cfg.jobs);

        // Environmental selection over parents + offspring.
        fronts = nondominated_sort(pop);
        std::vector<Member> survivors;
        survivors.reserve(n);
        for (auto& f : fronts) {
            assign_crowding(pop, f);
            if (survivors.size() + f.size() <= n) {
                for (std::size_t i : f) {
                    survivors.push_back(std::move(pop[i]));
                }
                continue;
            }
            std::sort(f.begin(), f.end(), [&](std::size_t a, std::size_t b) {
                return pop[a].crowding != pop[b].crowding ? pop[a].crowding > pop[b].crowding : a < b;
            });
            for (std::size_t r = 0; survivors.size() < n; ++r) {
                survivors.push_back(std::move(pop[f[r]]));
            }
            break;
        }
        pop = std::move(survivors);
        fronts = nondominated_sort(pop);
        for (const auto& f : fronts) {
            assign_crowding(pop, f);
        }
        if (cfg.observer) {
            cfg.observer(snapshot(gen, pop, fronts.front()));
        }
    }

    ParetoBound out;
    out.kind = BoundKind::B_opt;
    out.case_id = sc.id;
    out.senses = bopt_senses();
    std::vector<std::size_t> first = fronts.front();
    std::sort(first.begin(), first.end(), [&](std::size_t a, std::size_t b) {
        return pop[a].min_obj != pop[b].min_obj ? pop[a].min_obj < pop[b].min_obj : pop[a].genome < pop[b].genome;
    });
    for (std::size_t i : first) {
        if (pop[i].eval.feasible) {
            out.entries.push_back({pop[i].eval.solution, pop[i].eval.objectives, bopt_point(pop[i].eval.objectives)});
        }
    }
    dedupe(out, cfg.dedupe_resolution);
    return out;
}

void dedupe(ParetoBound& bound, double resolution)
{
    std::vector<BoundEntry> kept;
    for (auto& e : bound.entries) {
        const bool dup = std::any_of(kept.begin(), kept.end(), [&](const BoundEntry& k) {
            for (std::size_t a = 0; a < e.point.size(); ++a) {
                if (!(std::abs(k.point[a] - e.point[a]) <= resolution)) {
                    return false;
                }
            }
            return true;
        });
        if (!dup) {
            kept.push_back(std::move(e));
        }
    }
    bound.entries = std::move(kept);
}

namespace {

ParetoBound filtered(const ParetoBound& b, BoundKind kind)
{
    ParetoBound out;
    out.kind = kind;
    out.case_id = b.case_id;
    out.senses = b.senses;
    out.skipped = b.skipped;
    for (std::size_t i : pareto_filter(b.points(), b.senses)) {
        out.entries.push_back(b.entries[i]);
    }
    return out;
}

} // namespace

DerivedBounds derive_bounds(const ParetoBound& b_opt)
{
    DerivedBounds d;
    const std::vector<Sense> both_min = {Sense::Minimize, Sense::Minimize};
    d.b_c.kind = BoundKind::B_c;
    d.b_r.kind = BoundKind::B_r;
    for (auto* b : {&d.b_c, &d.b_r}) {
        b->case_id = b_opt.case_id;
        b->senses = both_min;
    }
    for (std::size_t i = 0; i < b_opt.entries.size(); ++i) {
        const auto& e = b_opt.entries[i];
        const auto dc = derived_criteria(e.objectives);
        if (std::isfinite(dc.fc_D) && std::isfinite(dc.fc_E)) {
            d.b_c.entries.push_back({e.solution, e.objectives, {dc.fc_D, dc.fc_E}});
        } else {
            d.b_c.skipped.push_back(i);
        }
        if (std::isfinite(dc.fr_D) && std::isfinite(dc.fr_E)) {
            d.b_r.entries.push_back({e.solution, e.objectives, {dc.fr_D, dc.fr_E}});
        } else {
            d.b_r.skipped.push_back(i);
        }
    }
    d.b_c_opt = filtered(d.b_c, BoundKind::B_c_opt);
    d.b_r_opt = filtered(d.b_r, BoundKind::B_r_opt);
    dedupe(d.b_c_opt, 1e-9);
    dedupe(d.b_r_opt, 1e-9);
    return d;
}

} // namespace relaybound
