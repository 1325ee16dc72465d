#include "vines/core/simulator.hpp"

#include "vines/core/dynamics.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <utility>
#include <vector>

namespace vines::core {

namespace {

namespace odeint = boost::numeric::odeint;

// x1 v1 x2 v2 i_damp i_coil
using Vec = std::array<double, 6>;
using Stepper = odeint::runge_kutta_dopri5<Vec>;
using Dense = odeint::result_of::make_dense_output<Stepper>::type;

constexpr int kSubIntervals = 4;
constexpr double kNever = -std::numeric_limits<double>::infinity();

Vec pack(const SimState& s) { return {s.x1, s.v1, s.x2, s.v2, s.i_damp, s.i_coil}; }

SimState unpack(const Vec& y, double tau, double e_imp) {
    return {tau, y[0], y[1], y[2], y[3], y[4], y[5], e_imp};
}

struct FreeFlight {
    SystemParams p;
    void operator()(const Vec& y, Vec& dy, double /*t*/) const {
        const auto d = rhs(unpack(y, 0.0, 0.0), p);
        dy = {d.dx1, d.dv1, d.dx2, d.dv2, d.d_i_damp, d.d_i_coil};
    }
};

// Ball locked to a wall: LO and ball move as one mass 1 + eps, the coil is idle.
struct Sticking {
    SystemParams p;
    [[nodiscard]] double acceleration(const Vec& y) const {
        return -(p.eps * p.lambda * y[1] + y[0]) / (1.0 + p.eps);
    }
    void operator()(const Vec& y, Vec& dy, double /*t*/) const {
        const double a = acceleration(y);
        dy = {y[1], a, y[1], a, y[1] * y[1], 0.0};
    }
};

// g = wall * w - L_c, non-positive inside the cavity.
struct WallGap {
    int wall;
    double L_c;
    [[nodiscard]] double value(const Vec& y) const { return wall * (y[0] - y[2]) - L_c; }
    [[nodiscard]] double slope(const Vec& y) const { return wall * (y[1] - y[3]); }
};

// Contact force sign while sticking; release when it turns non-negative.
struct StickRelease {
    int wall;
    Sticking flow;
    [[nodiscard]] double value(const Vec& y) const {
        return wall * (flow.p.eps * flow.p.lambda * y[1] + y[0]);
    }
    [[nodiscard]] double slope(const Vec& y) const {
        return wall * (flow.p.eps * flow.p.lambda * flow.acceleration(y) + y[1]);
    }
};

struct Crossing {
    double tau = 0.0;
    bool tangent = false;
};

template <class Guard>
class CrossingSearch {
public:
    CrossingSearch(const Dense& dense, const Guard& guard, const SimOptions& opts, double exclude_until)
        : dense_(dense), guard_(guard), opts_(opts), exclude_until_(exclude_until) {}

    // First crossing of the guard through zero from below in [a, b].
    std::optional<Crossing> run(double a, double b) {
        Point left = at(a);
        if (left.t > exclude_until_ && left.g >= -opts_.gap_tol && left.s > 0.0) {
            return Crossing{a, false};
        }
        for (int i = 1; i <= kSubIntervals; ++i) {
            const double t = (i == kSubIntervals) ? b : a + (b - a) * i / kSubIntervals;
            const Point right = at(t);
            if (auto c = scan(left, right)) {
                return c;
            }
            left = right;
        }
        return std::nullopt;
    }

private:
    struct Point {
        double t;
        double g;
        double s;
    };

    Point at(double t) {
        dense_.calc_state(t, y_);
        return {t, guard_.value(y_), guard_.slope(y_)};
    }

    std::optional<Crossing> scan(const Point& l, const Point& r) {
        if (l.s > 0.0 && r.s < 0.0) {
            const Point m = at(solve([this](double t) { return at(t).s; }, l.t, r.t, l.s, r.s));
            if (m.t > exclude_until_ && m.g >= -opts_.gap_tol) {
                if (m.g <= opts_.gap_tol) {
                    return Crossing{m.t, true};
                }
                if (l.g < 0.0) {
                    return Crossing{root(l, m), false};
                }
                return Crossing{l.t, false};
            }
            return std::nullopt;
        }
        if (l.g < 0.0 && r.g >= 0.0) {
            return Crossing{root(l, r), false};
        }
        // Leaving a wall from a roundoff-positive gap and returning within one sub-interval.
        if (l.g >= 0.0 && r.g >= 0.0 && l.s < 0.0 && r.s > 0.0) {
            const Point m = at(solve([this](double t) { return at(t).s; }, l.t, r.t, l.s, r.s));
            if (m.g < 0.0) {
                return Crossing{root(m, r), false};
            }
            if (m.t > exclude_until_) {
                return Crossing{m.t, true};
            }
        }
        return std::nullopt;
    }

    double root(const Point& l, const Point& r) {
        const double t = solve([this](double x) { return at(x).g; }, l.t, r.t, l.g, r.g);
        const Point hit = at(t);
        if (std::abs(hit.g) > opts_.gap_tol) {
            throw IntegrationError(fmt::format("contact localization failed at tau={:.17g}, g={:.3e}",
                                               t, hit.g),
                                   unpack(y_, t, 0.0));
        }
        return t;
    }

    // Returns the upper end of the final bracket, where the function is >= 0
    // for guard roots and <= 0 for slope roots.
    template <class F>
    double solve(F f, double lo, double hi, double f_lo, double f_hi) {
        if (f_hi == 0.0) {
            return hi;
        }
        std::uintmax_t iterations = 200;
        const double resolution = opts_.time_tol * 1e-3;
        const auto done = [resolution](double x0, double x1) { return std::abs(x1 - x0) <= resolution; };
        const auto bracket = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, done, iterations);
        return bracket.second;
    }

    const Dense& dense_;
    Guard guard_;
    const SimOptions& opts_;
    double exclude_until_;
    Vec y_{};
};

struct FlowOutcome {
    std::optional<Crossing> crossing;
    int wall = 0;
};

// Advances `y` from `t` toward `t_stop` along `System`, stopping at the first
// guard crossing. Grid samples strictly before the stop instant go to `emit`.
template <class System, class Guards, class Emit>
FlowOutcome advance(Vec& y, double& t, double t_stop, const System& system, const Guards& guards,
                    const SimOptions& opts, double& dt_guess, Emit&& emit) {
    Dense dense = odeint::make_dense_output(opts.abs_tol, opts.rel_tol, opts.max_step, Stepper());
    dense.initialize(y, t, dt_guess);

    while (true) {
        std::pair<double, double> step;
        try {
            step = dense.do_step(system);
        } catch (const std::exception& e) {
            throw IntegrationError(fmt::format("integrator failure at tau={:.17g}: {}", t, e.what()),
                                   unpack(y, t, 0.0));
        }
        const auto [t0, t1] = step;
        if (t1 - t0 <= 1e-15 * std::max(1.0, std::abs(t0))) {
            throw IntegrationError(fmt::format("step size underflow at tau={:.17g}", t0),
                                   unpack(dense.current_state(), t0, 0.0));
        }
        dt_guess = dense.current_time_step();
        const double end = std::min(t1, t_stop);

        FlowOutcome out;
        for (const auto& [wall, guard, exclude_until] : guards) {
            CrossingSearch search(dense, guard, opts, exclude_until);
            if (auto c = search.run(t0, end); c && (!out.crossing || c->tau < out.crossing->tau)) {
                out.crossing = c;
                out.wall = wall;
            }
        }

        const double stop = out.crossing ? out.crossing->tau : end;
        emit(dense, t0, stop);
        if (out.crossing || t1 >= t_stop) {
            t = stop;
            dense.calc_state(t, y);
            return out;
        }
    }
}

template <class Guard>
struct GuardEntry {
    int wall;
    Guard guard;
    double exclude_until;
};

class HybridRun {
public:
    HybridRun(const SystemParams& p, const SimOptions& opts, Trajectory* out)
        : p_(p), opts_(opts), out_(out) {}

    // Free flight from `s` until `t_stop` or the first contact.
    FlowOutcome free_flight(Vec& y, double& t, double t_stop, double& dt_guess) {
        const std::array<GuardEntry<WallGap>, 2> guards{{
            {+1, WallGap{+1, p_.L_c}, leaving_wall_ == +1 ? leaving_until_ : kNever},
            {-1, WallGap{-1, p_.L_c}, leaving_wall_ == -1 ? leaving_until_ : kNever},
        }};
        return advance(y, t, t_stop, FreeFlight{p_}, guards, opts_, dt_guess,
                       [this](const Dense& d, double lo, double hi) { emit_grid(d, lo, hi); });
    }

    void run(const InitialState& init, double t_end) {
        double t = 0.0;
        double e_imp = 0.0;
        double dt_guess = 1e-3;
        Vec y{init.x1, init.v1, init.x2, init.v2, 0.0, 0.0};
        record(unpack(y, t, e_imp), SampleKind::grid);

        std::size_t rapid = 0;
        double last_impact = kNever;
        int sticking_wall = 0;
        double sticking_since = 0.0;

        while (t < t_end) {
            if (sticking_wall != 0) {
                const std::array<GuardEntry<StickRelease>, 1> guards{
                    {{sticking_wall, StickRelease{sticking_wall, Sticking{p_}}, t}}};
                const auto outcome =
                    advance(y, t, t_end, Sticking{p_}, guards, opts_, dt_guess,
                            [this](const Dense& d, double lo, double hi) { emit_grid(d, lo, hi); });
                out_->sticking.push_back({sticking_since, t, sticking_wall});
                if (!outcome.crossing) {
                    break;
                }
                y[3] = y[1];
                y[2] = y[0] - sticking_wall * p_.L_c;
                leave(sticking_wall, t);
                sticking_wall = 0;
                continue;
            }

            const auto outcome = free_flight(y, t, t_end, dt_guess);
            if (!outcome.crossing) {
                break;
            }
            const int wall = outcome.wall;
            const SimState pre = unpack(y, t, e_imp);
            record(pre, SampleKind::pre_impact);

            const auto hit = impact_map(y[1], y[3], p_);
            out_->impacts.push_back({t, wall, y[1], y[3], hit.v1_post, hit.v2_post, hit.energy_loss,
                                     outcome.crossing->tangent});
            if (out_->impacts.size() > opts_.max_impacts) {
                throw ZenoError(fmt::format("impact count exceeded {} at tau={:.17g}", opts_.max_impacts, t),
                                pre, out_->impacts.size());
            }
            y[1] = hit.v1_post;
            y[3] = hit.v2_post;
            e_imp += hit.energy_loss;

            rapid = (t - last_impact < opts_.rapid_impact_dt) ? rapid + 1 : 0;
            last_impact = t;

            if (std::abs(y[1] - y[3]) < opts_.graze_eps || rapid > opts_.max_rapid_impacts) {
                // Capture: the residual relative motion is absorbed plastically.
                const double common = (y[1] + p_.eps * y[3]) / (1.0 + p_.eps);
                const double before = y[1] * y[1] + p_.eps * y[3] * y[3];
                y[1] = common;
                y[3] = common;
                e_imp += before - (1.0 + p_.eps) * common * common;
                y[2] = y[0] - wall * p_.L_c;
                rapid = 0;
                const StickRelease release{wall, Sticking{p_}};
                if (release.value(y) < 0.0) {
                    sticking_wall = wall;
                    sticking_since = t;
                } else {
                    out_->sticking.push_back({t, t, wall});
                }
            }
            leave(wall, t);
            record(unpack(y, t, e_imp), SampleKind::post_impact);
        }

        if (out_->samples.back().state.tau < t_end || out_->samples.size() == 1) {
            record(unpack(y, t_end, e_imp), SampleKind::grid);
        }
    }

    void leave(int wall, double t) {
        leaving_wall_ = wall;
        leaving_until_ = t + opts_.time_tol;
    }

private:
    void record(const SimState& s, SampleKind kind) { out_->samples.push_back({s, kind}); }

    void emit_grid(const Dense& d, double lo, double hi) {
        if (out_ == nullptr || opts_.sample_dt <= 0.0) {
            return;
        }
        const double t_end = out_->t_end;
        Vec y{};
        while (true) {
            const double tk = static_cast<double>(next_grid_) * opts_.sample_dt;
            if (tk >= hi || tk >= t_end - 1e-9 * opts_.sample_dt) {
                return;
            }
            if (tk >= lo) {
                d.calc_state(tk, y);
                record(unpack(y, tk, current_e_imp()), SampleKind::grid);
            }
            ++next_grid_;
        }
    }

    [[nodiscard]] double current_e_imp() const { return out_->samples.back().state.e_imp; }

    SystemParams p_;
    SimOptions opts_;
    Trajectory* out_;
    std::size_t next_grid_ = 1;
    int leaving_wall_ = 0;
    double leaving_until_ = kNever;
};

} // namespace

StepResult step_to_event(const SimState& s, const SystemParams& p, double dt_max, const SimOptions& opts) {
    validate(p);
    if (!(dt_max > 0.0)) {
        throw std::domain_error("dt_max must be positive");
    }
    HybridRun run(p, opts, nullptr);
    const double w = s.x1 - s.x2;
    const int wall = w >= 0.0 ? +1 : -1;
    if (wall * w - p.L_c >= -opts.gap_tol && wall * (s.v1 - s.v2) <= 0.0) {
        run.leave(wall, s.tau);
    }
    Vec y = pack(s);
    double t = s.tau;
    double dt_guess = std::min(1e-3, dt_max);
    const auto outcome = run.free_flight(y, t, s.tau + dt_max, dt_guess);

    StepResult result;
    result.state = unpack(y, t, s.e_imp);
    if (outcome.crossing) {
        const auto hit = impact_map(y[1], y[3], p);
        result.event = ImpactEvent{t,           outcome.wall,    y[1], y[3], hit.v1_post,
                                   hit.v2_post, hit.energy_loss, outcome.crossing->tangent};
    }
    return result;
}

Trajectory simulate(const SystemParams& p, const InitialState& init, double t_end, const SimOptions& opts) {
    validate(p);
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw std::domain_error("t_end must be finite and positive");
    }
    Trajectory tr;
    tr.params = p;
    tr.t_end = t_end;
    InitialState start = init;
    const double w = start.x1 - start.x2;
    if (std::abs(w) > p.L_c) {
        start.x2 = start.x1 + (start.x2 >= start.x1 ? 1.0 : -1.0) * p.L_c;
        tr.warnings.push_back(fmt::format(
            "initial ball position x2={:.17g} lies outside the cavity (L_c={:.17g}); projected to x2={:.17g}",
            init.x2, p.L_c, start.x2));
    }
    const double w0 = start.x1 - start.x2;
    if (std::abs(w0) >= p.L_c - opts.gap_tol && w0 * (start.v1 - start.v2) > 0.0) {
        tr.warnings.emplace_back("initial state sits on a wall and approaches it; impact applied at tau=0");
    }
    tr.initial = start;
    if (opts.sample_dt > 0.0) {
        tr.samples.reserve(static_cast<std::size_t>(t_end / opts.sample_dt) + 16);
    }
    HybridRun run(p, opts, &tr);
    run.run(start, t_end);
    return tr;
}

} // namespace vines::core
