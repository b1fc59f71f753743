#include "hz/taylor_ode.hpp"

#include "hz/errors.hpp"

#include <algorithm>
#include <map>
#include <memory>

namespace hz {

namespace {

void append_term(Poly3& poly, Real coeff, int kx, int ky, int kz) {
    if (coeff == 0) return;
    coeff = to_working(coeff);
    for (auto& m : poly) {
        if (m.kx == kx && m.ky == ky && m.kz == kz) {
            m.coeff += coeff;
            return;
        }
    }
    poly.push_back({std::move(coeff), kx, ky, kz});
}

void append_table(Poly3& poly, const std::vector<PerturbationSeries::Term>& table,
                  const Real& delta, const Real& p) {
    for (const auto& t : table) append_term(poly, t.coeff * pow(delta, p + t.q), t.k, t.m, t.n);
}

Real eval_poly(const Poly3& poly, const Vec3& s) {
    Real acc{0};
    for (const auto& m : poly)
        acc += m.coeff * pow_int(s[0], m.kx) * pow_int(s[1], m.ky) * pow_int(s[2], m.kz);
    return acc;
}

}  // namespace

PolyField3 PolyField3::build(const ModelSpec& spec, const PerturbationSeries& series,
                             const Params& params) {
    PolyField3 f;
    Real rot = params.alpha / params.delta;
    // dx/dt = sigma x - d xz + (alpha/delta) y + c yz + f-table
    append_term(f.comp[0], params.sigma, 1, 0, 0);
    append_term(f.comp[0], -spec.d, 1, 0, 1);
    append_term(f.comp[0], rot, 0, 1, 0);
    append_term(f.comp[0], spec.c, 0, 1, 1);
    append_table(f.comp[0], series.f, params.delta, spec.p);
    // dy/dt = -(alpha/delta) x - c xz + sigma y - d yz + g-table
    append_term(f.comp[1], -rot, 1, 0, 0);
    append_term(f.comp[1], -spec.c, 1, 0, 1);
    append_term(f.comp[1], params.sigma, 0, 1, 0);
    append_term(f.comp[1], -spec.d, 0, 1, 1);
    append_table(f.comp[1], series.g, params.delta, spec.p);
    // dz/dt = -1 + b x^2 + b y^2 + z^2 + h-table
    append_term(f.comp[2], Real(-1), 0, 0, 0);
    append_term(f.comp[2], spec.b, 2, 0, 0);
    append_term(f.comp[2], spec.b, 0, 2, 0);
    append_term(f.comp[2], Real(1), 0, 0, 2);
    append_table(f.comp[2], series.h, params.delta, spec.p);
    return f;
}

Vec3 PolyField3::eval(const Vec3& s) const {
    return {eval_poly(comp[0], s), eval_poly(comp[1], s), eval_poly(comp[2], s)};
}

PolyField3 PolyField3::derivative(int axis) const {
    PolyField3 d;
    for (int c = 0; c < 3; c++) {
        for (const auto& m : comp[c]) {
            int e[3] = {m.kx, m.ky, m.kz};
            if (e[axis] == 0) continue;
            Real coeff = m.coeff * e[axis];
            e[axis]--;
            append_term(d.comp[c], coeff, e[0], e[1], e[2]);
        }
    }
    return d;
}

Mat3 PolyField3::jacobian(const Vec3& s) const {
    Mat3 j;
    for (int axis = 0; axis < 3; axis++) {
        PolyField3 d = derivative(axis);
        for (int c = 0; c < 3; c++) j[c][axis] = eval_poly(d.comp[c], s);
    }
    return j;
}

namespace {

// ---------------------------------------------------------------------------
// Taylor method: straight-line program of series products
// ---------------------------------------------------------------------------

// node indices 0..2 are the state series x, y, z; further nodes are products
struct ProductProgram {
    struct Node {
        int left, right;  // parent node indices
    };
    std::vector<Node> nodes;                      // product nodes, offset by 3
    std::map<std::array<int, 3>, int> monomial_cache;

    int node_for(std::array<int, 3> key) {
        int total = key[0] + key[1] + key[2];
        if (total == 1) return key[0] ? 0 : (key[1] ? 1 : 2);
        auto it = monomial_cache.find(key);
        if (it != monomial_cache.end()) return it->second;
        // peel one variable off the highest-degree slot for balanced chains
        int axis = key[0] ? 0 : (key[1] ? 1 : 2);
        std::array<int, 3> rest = key;
        rest[axis]--;
        std::array<int, 3> unit{0, 0, 0};
        unit[axis] = 1;
        int l = node_for(rest);
        int r = node_for(unit);
        nodes.push_back({l, r});
        int idx = 3 + static_cast<int>(nodes.size()) - 1;
        monomial_cache.emplace(key, idx);
        return idx;
    }
};

struct TaylorWorkspace {
    // series[n][i]: i-th Taylor coefficient of node n (0..2 state, then products)
    std::vector<std::vector<Real>> series;

    void reset(std::size_t node_count, int order) {
        series.assign(node_count, {});
        for (auto& s : series) s.assign(order + 2, Real(0));
    }
};

class TaylorStepper final : public Stepper {
  public:
    TaylorStepper(const PolyField3& field, const IntegratorConfig& cfg) : cfg_(cfg) {
        Real tol = cfg.abs_tol < cfg.rel_tol ? cfg.abs_tol : cfg.rel_tol;
        double lt = -static_cast<double>(log(tol));
        order_ = std::max(8, static_cast<int>(lt / 2) + 3);
        for (int c = 0; c < 3; c++) {
            for (const auto& m : field.comp[c]) {
                if (m.kx + m.ky + m.kz == 0) {
                    constants_[c] += m.coeff;
                    continue;
                }
                rhs_[c].push_back({m.coeff, program_.node_for({m.kx, m.ky, m.kz})});
            }
        }
    }

    Real initial_step(const Vec3&) const override { return Real(1) / 8; }

    StepOutput step(const Vec3& y, const Real& h_request) override {
        if (h_request == 0) throw std::invalid_argument("TaylorStepper: zero step request");
        int N = order_;
        ws_.reset(3 + program_.nodes.size(), N);
        for (int c = 0; c < 3; c++) ws_.series[c][0] = y[c];
        for (int i = 0; i <= N; i++) {
            eval_products(i);
            if (i == N) break;
            for (int c = 0; c < 3; c++) {
                Real rhs = i == 0 ? constants_[c] : Real(0);
                for (const auto& [coeff, node] : rhs_[c]) rhs += coeff * ws_.series[node][i];
                ws_.series[c][i + 1] = rhs / (i + 1);
            }
        }

        Real scale = std::max({abs(y[0]), abs(y[1]), abs(y[2]), Real(1)});
        Real tol = cfg_.abs_tol + cfg_.rel_tol * scale;
        Real h_auto = step_from_tail(tol, N);
        if (cfg_.max_step > 0 && h_auto > cfg_.max_step) h_auto = cfg_.max_step;
        Real h = abs(h_request) < h_auto ? abs(h_request) : h_auto;
        if (h_request < 0) h = -h;

        auto coeffs = std::make_shared<std::array<std::vector<Real>, 3>>();
        for (int c = 0; c < 3; c++)
            (*coeffs)[c] = std::vector<Real>(ws_.series[c].begin(), ws_.series[c].begin() + N + 1);
        auto dense = [coeffs, N](const Real& tau) {
            Vec3 out;
            for (int c = 0; c < 3; c++) {
                Real acc = (*coeffs)[c][N];
                for (int i = N - 1; i >= 0; i--) acc = acc * tau + (*coeffs)[c][i];
                out[c] = acc;
            }
            return out;
        };
        return {h, dense(h), dense};
    }

  private:
    void eval_products(int i) {
        for (std::size_t n = 0; n < program_.nodes.size(); n++) {
            const auto& node = program_.nodes[n];
            const auto& a = ws_.series[node.left];
            const auto& b = ws_.series[node.right];
            Real acc{0};
            for (int j = 0; j <= i; j++) acc += a[j] * b[i - j];
            ws_.series[3 + n][i] = acc;
        }
    }

    Real step_from_tail(const Real& tol, int N) const {
        // h from the last two coefficient magnitudes, Jorba-Zou style
        Real aN{0}, aN1{0};
        for (int c = 0; c < 3; c++) {
            aN = std::max(aN, abs(ws_.series[c][N]));
            aN1 = std::max(aN1, abs(ws_.series[c][N - 1]));
        }
        Real h{0};
        if (aN > 0) h = pow(tol / aN, Real(1) / N);
        if (aN1 > 0) {
            Real h2 = pow(tol / aN1, Real(1) / (N - 1));
            h = (h == 0 || h2 < h) ? h2 : h;
        }
        if (h == 0) h = 1;  // polynomial solution: any step is exact
        return h * Real(9) / 10;
    }

    IntegratorConfig cfg_;
    int order_;
    ProductProgram program_;
    Real constants_[3]{Real(0), Real(0), Real(0)};
    std::vector<std::pair<Real, int>> rhs_[3];
    TaylorWorkspace ws_;
};

// ---------------------------------------------------------------------------
// Gauss-Legendre collocation with runtime tableau and step doubling
// ---------------------------------------------------------------------------

struct GaussTableau {
    int s;
    std::vector<Real> c, b;                  // nodes and weights on [0,1]
    std::vector<std::vector<Real>> a;        // a[i][j] = int_0^{c_i} ell_j
    std::vector<std::vector<Real>> L;        // L[j]: coefficients of int_0^s ell_j

    explicit GaussTableau(int stages) : s(stages) {
        const auto& rule = detail_gauss(stages);
        c.resize(s);
        b.resize(s);
        for (int i = 0; i < s; i++) {
            c[i] = (rule.first[i] + 1) / 2;
            b[i] = rule.second[i] / 2;
        }
        // Lagrange basis ell_j(t) = prod_{k!=j} (t - c_k)/(c_j - c_k)
        a.assign(s, std::vector<Real>(s));
        L.assign(s, {});
        for (int j = 0; j < s; j++) {
            std::vector<Real> num{Real(1)};
            Real den = 1;
            for (int k = 0; k < s; k++) {
                if (k == j) continue;
                std::vector<Real> next(num.size() + 1, Real(0));
                for (std::size_t i = 0; i < num.size(); i++) {
                    next[i + 1] += num[i];
                    next[i] -= num[i] * c[k];
                }
                num = std::move(next);
                den *= c[j] - c[k];
            }
            // antiderivative coefficients: t^i -> t^{i+1}/(i+1)
            std::vector<Real> anti(num.size() + 1, Real(0));
            for (std::size_t i = 0; i < num.size(); i++) anti[i + 1] = num[i] / Real(i + 1) / den;
            L[j] = anti;
            for (int i = 0; i < s; i++) {
                Real acc{0};
                for (int p = static_cast<int>(anti.size()) - 1; p >= 0; p--)
                    acc = acc * c[i] + anti[p];
                a[i][j] = acc;
            }
        }
    }

  private:
    static std::pair<std::vector<Real>, std::vector<Real>> detail_gauss(int n);
};

std::pair<std::vector<Real>, std::vector<Real>> GaussTableau::detail_gauss(int n) {
    // Legendre nodes/weights on (-1,1) by Newton, as in quadrature.hpp but
    // kept local to avoid the cache there (the tableau is built once)
    std::vector<Real> x(n), w(n);
    Real pi_v = pi();
    for (int i = 0; i < (n + 1) / 2; i++) {
        Real xi = cos(pi_v * (4 * i + 3) / (4 * n + 2));
        Real dp{0};
        for (int it = 0; it < 200; it++) {
            Real p0 = 1, p1 = xi;
            for (int k = 2; k <= n; k++) {
                Real p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (xi * p1 - p0) / (xi * xi - 1);
            Real step = p1 / dp;
            xi -= step;
            if (abs(step) <= ldexp(Real(1), -static_cast<long>(current_precision_bits()) + 4))
                break;
        }
        x[i] = -xi;
        w[i] = 2 / ((1 - xi * xi) * dp * dp);
        x[n - 1 - i] = xi;
        w[n - 1 - i] = w[i];
    }
    return {x, w};
}

class GaussStepper final : public Stepper {
  public:
    GaussStepper(const PolyField3& field, const IntegratorConfig& cfg)
        : field_(field), cfg_(cfg), tab_(cfg.gauss_stages) {}

    Real initial_step(const Vec3& y) const override {
        Vec3 f = field_.eval(y);
        Real speed = std::max(norm_inf(f), Real(1) / 100);
        return Real(1) / 10 / speed;
    }

    StepOutput step(const Vec3& y, const Real& h_request) override {
        if (h_cur_ == 0) h_cur_ = initial_step(y);
        int sign = h_request < 0 ? -1 : 1;
        Real h = h_cur_ < abs(h_request) ? h_cur_ : abs(h_request);
        Real scale = std::max({abs(y[0]), abs(y[1]), abs(y[2]), Real(1)});
        Real tol = cfg_.abs_tol + cfg_.rel_tol * scale;
        for (int attempt = 0; attempt < 60; attempt++) {
            Real hs = sign * h;
            Vec3 y_big;
            if (!whole_step(y, hs, y_big)) {
                h /= 2;
                continue;
            }
            Vec3 y_mid, y_small;
            std::vector<Vec3> k1, k2;
            if (!whole_step(y, hs / 2, y_mid, &k1) || !whole_step(y_mid, hs / 2, y_small, &k2)) {
                h /= 2;
                continue;
            }
            Real err = norm_inf(y_big - y_small);
            if (err <= tol) {
                // accept the composite (better) solution; dense output from the
                // two collocation polynomials
                auto tab = &tab_;
                auto dense = [tab, y, y_mid, k1 = std::move(k1), k2 = std::move(k2),
                              hs](const Real& tau) {
                    Real half = hs / 2;
                    bool first = abs(tau) <= abs(half);
                    const Vec3& y0 = first ? y : y_mid;
                    const std::vector<Vec3>& kk = first ? k1 : k2;
                    Real local = first ? tau : tau - half;
                    Real sarg = local / half;
                    Vec3 out = y0;
                    for (int j = 0; j < tab->s; j++) {
                        // L_j(sarg) via Horner
                        const auto& Lc = tab->L[j];
                        Real acc{0};
                        for (int p = static_cast<int>(Lc.size()) - 1; p >= 0; p--)
                            acc = acc * sarg + Lc[p];
                        for (int c = 0; c < 3; c++) out[c] += half * acc * kk[j][c];
                    }
                    return out;
                };
                // controller update for the next step
                Real grow = pow(tol / (err + ldexp(tol, -40)), Real(1) / (2 * tab_.s + 1));
                if (grow > 2) grow = 2;
                if (grow < Real(1) / 5) grow = Real(1) / 5;
                h_cur_ = h * grow * Real(9) / 10;
                return {hs, y_small, dense};
            }
            h /= 2;
        }
        throw accuracy_error("GaussStepper: step control failed to meet tolerance", h);
    }

  private:
    // one collocation step; false if the fixed-point iteration stalls
    bool whole_step(const Vec3& y, const Real& h, Vec3& out, std::vector<Vec3>* stages = nullptr) {
        int s = tab_.s;
        std::vector<Vec3> K(s, field_.eval(y));
        Real target = ldexp(cfg_.abs_tol + cfg_.rel_tol, -8);
        for (int it = 0; it < 100; it++) {
            Real delta_max{0};
            for (int i = 0; i < s; i++) {
                Vec3 yi = y;
                for (int j = 0; j < s; j++)
                    for (int c = 0; c < 3; c++) yi[c] += h * tab_.a[i][j] * K[j][c];
                Vec3 knew = field_.eval(yi);
                delta_max = std::max(delta_max, norm_inf(knew - K[i]));
                K[i] = knew;
            }
            if (delta_max <= target) {
                out = y;
                for (int i = 0; i < s; i++)
                    for (int c = 0; c < 3; c++) out[c] += h * tab_.b[i] * K[i][c];
                if (stages) *stages = std::move(K);
                return true;
            }
        }
        return false;
    }

    PolyField3 field_;
    IntegratorConfig cfg_;
    GaussTableau tab_;
    Real h_cur_{0};
};

}  // namespace

std::unique_ptr<Stepper> make_stepper(const PolyField3& field, const IntegratorConfig& cfg) {
    cfg.validate();
    if (cfg.method == IntegratorConfig::Method::taylor_series)
        return std::make_unique<TaylorStepper>(field, cfg);
    return std::make_unique<GaussStepper>(field, cfg);
}

IntegrationResult integrate(const PolyField3& field, const IntegratorConfig& cfg, Vec3 state0,
                            const Real& t_final, const StepObserver& observer) {
    cfg.validate();
    PrecisionGuard guard(cfg.precision_bits + 16);
    IntegrationResult res;
    res.state = {to_working(state0[0]), to_working(state0[1]), to_working(state0[2])};
    res.t = 0;
    if (t_final == 0) return res;
    auto stepper = make_stepper(field, cfg);
    while (res.steps < cfg.max_steps) {
        Real remaining = t_final - res.t;
        if ((t_final > 0 && remaining <= 0) || (t_final < 0 && remaining >= 0)) return res;
        StepOutput out = stepper->step(res.state, remaining);
        Real t_begin = res.t;
        res.t += out.h;
        res.state = out.y_end;
        res.steps++;
        if (norm_inf(res.state) > 1000)
            throw std::runtime_error("integrate: trajectory blow-up (|state| > 1e3)");
        if (observer && !observer(t_begin, out)) {
            res.event_stop = true;
            return res;
        }
    }
    throw std::runtime_error("integrate: step budget exhausted");
}

IntegrationResult integrate(const ModelSpec& spec, const PerturbationSeries& series,
                            const Params& params, const IntegratorConfig& cfg,
                            const StateCartesian& state0, const Real& t_final,
                            const StepObserver& observer) {
    PolyField3 field = PolyField3::build(spec, series, params);
    return integrate(field, cfg, Vec3{state0.x, state0.y, state0.z}, t_final, observer);
}

namespace {

// per-step cache of monomial Taylor series built from the state series
struct MonomialSeries {
    const std::array<std::vector<Real>, 3>& state;
    int order;
    std::map<std::array<int, 3>, std::vector<Real>> cache;

    static std::vector<Real> convolve(const std::vector<Real>& a, const std::vector<Real>& b,
                                      int order) {
        std::vector<Real> out(order + 1, Real(0));
        for (int i = 0; i <= order; i++)
            for (int j = 0; j <= i; j++) out[i] += a[j] * b[i - j];
        return out;
    }

    const std::vector<Real>& get(std::array<int, 3> key) {
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        std::vector<Real> value;
        int total = key[0] + key[1] + key[2];
        if (total == 0) {
            value.assign(order + 1, Real(0));
            value[0] = 1;
        } else if (total == 1) {
            int axis = key[0] ? 0 : (key[1] ? 1 : 2);
            value = state[axis];
            value.resize(order + 1, Real(0));
        } else {
            int axis = key[0] ? 0 : (key[1] ? 1 : 2);
            std::array<int, 3> rest = key;
            rest[axis]--;
            std::array<int, 3> unit{0, 0, 0};
            unit[axis] = 1;
            value = convolve(get(rest), get(unit), order);
        }
        return cache.emplace(key, std::move(value)).first->second;
    }
};

}  // namespace

VariationalResult integrate_variational(const PolyField3& field, const IntegratorConfig& cfg,
                                        Vec3 state0, const Real& t_final) {
    cfg.validate();
    PrecisionGuard guard(cfg.precision_bits + 16);
    // state Taylor steps drive the variational columns V' = J(x) V, solved
    // with the same series order by convolving the Jacobian polynomials
    PolyField3 jac[3];  // jac[axis].comp[c] = d F_c / d axis
    for (int axis = 0; axis < 3; axis++) jac[axis] = field.derivative(axis);

    IntegratorConfig state_cfg = cfg;
    state_cfg.method = IntegratorConfig::Method::taylor_series;
    TaylorStepper stepper(field, state_cfg);

    Mat3 V;
    for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++) V[i][j] = i == j ? Real(1) : Real(0);

    VariationalResult res;
    res.state = state0;
    Real t = 0;
    Real tol = cfg.abs_tol < cfg.rel_tol ? cfg.abs_tol : cfg.rel_tol;
    int N = std::max(8, static_cast<int>(-static_cast<double>(log(tol)) / 2) + 3);
    long steps = 0;
    while (steps < cfg.max_steps) {
        Real remaining = t_final - t;
        if ((t_final > 0 && remaining <= 0) || (t_final < 0 && remaining >= 0)) break;
        StepOutput out = stepper.step(res.state, remaining);

        // state Taylor series on this step, re-derived by direct convolution
        std::array<std::vector<Real>, 3> xs;
        for (int c = 0; c < 3; c++) {
            xs[c].assign(N + 1, Real(0));
            xs[c][0] = res.state[c];
        }
        for (int i = 0; i < N; i++) {
            MonomialSeries cache{xs, i};
            for (int c = 0; c < 3; c++) {
                Real rhs{0};
                for (const auto& m : field.comp[c])
                    rhs += m.coeff * cache.get({m.kx, m.ky, m.kz})[i];
                xs[c][i + 1] = rhs / (i + 1);
            }
        }
        MonomialSeries monos{xs, N};

        // variational series per column
        std::array<std::array<std::vector<Real>, 3>, 3> vs;  // [col][comp]
        for (int col = 0; col < 3; col++)
            for (int c = 0; c < 3; c++) {
                vs[col][c].assign(N + 1, Real(0));
                vs[col][c][0] = V[c][col];
            }
        for (int i = 0; i < N; i++) {
            for (int col = 0; col < 3; col++) {
                for (int c = 0; c < 3; c++) {
                    Real rhs{0};
                    for (int axis = 0; axis < 3; axis++) {
                        for (const auto& m : jac[axis].comp[c]) {
                            const auto& ms = monos.get({m.kx, m.ky, m.kz});
                            Real conv{0};
                            for (int j = 0; j <= i; j++) conv += ms[j] * vs[col][axis][i - j];
                            rhs += m.coeff * conv;
                        }
                    }
                    vs[col][c][i + 1] = rhs / (i + 1);
                }
            }
        }
        // advance by the state step h
        for (int col = 0; col < 3; col++)
            for (int c = 0; c < 3; c++) {
                Real acc = vs[col][c][N];
                for (int i = N - 1; i >= 0; i--) acc = acc * out.h + vs[col][c][i];
                V[c][col] = acc;
            }
        res.state = out.y_end;
        t += out.h;
        steps++;
        if (norm_inf(res.state) > 1000)
            throw std::runtime_error("integrate_variational: trajectory blow-up");
    }
    if (steps >= cfg.max_steps)
        throw std::runtime_error("integrate_variational: step budget exhausted");
    res.monodromy = V;
    res.steps = steps;
    return res;
}

}  // namespace hz
