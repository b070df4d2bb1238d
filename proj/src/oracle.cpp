#include "ccd/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "ccd/errors.hpp"

namespace ccd::oracle {

Rat to_rat(double x)
{
    if (!std::isfinite(x)) {
        throw PreconditionError("to_rat: non-finite value");
    }
    Rat r;
    mpq_set_d(r.get_mpq_t(), x);
    return r;
}

double to_double(const Rat& x)
{
    if (sgn(x) == 0) {
        return 0.0;
    }
    const bool negative = sgn(x) < 0;
    mpz_class num = abs(x.get_num());
    mpz_class den = x.get_den();
    const long bn = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2));
    const long bd = static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
    // Scale so the integer quotient carries at least 54 significant bits.
    const long k = 55 - (bn - bd);
    if (k >= 0) {
        mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
    } else {
        mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-k));
    }
    mpz_class q, r;
    mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    const bool sticky = sgn(r) != 0;

    long lsb_exp = -k;
    const long bits = static_cast<long>(mpz_sizeinbase(q.get_mpz_t(), 2));
    long drop = bits - 53;
    if (lsb_exp + drop < -1074) {
        drop = -1074 - lsb_exp;  // subnormal range
    }
    if (drop > 0) {
        mpz_class rem;
        mpz_tdiv_r_2exp(rem.get_mpz_t(), q.get_mpz_t(), static_cast<mp_bitcnt_t>(drop));
        mpz_tdiv_q_2exp(q.get_mpz_t(), q.get_mpz_t(), static_cast<mp_bitcnt_t>(drop));
        mpz_class half = 1;
        mpz_mul_2exp(half.get_mpz_t(), half.get_mpz_t(), static_cast<mp_bitcnt_t>(drop - 1));
        const int c = cmp(rem, half);
        const bool round_up = c > 0 || (c == 0 && (sticky || mpz_odd_p(q.get_mpz_t())));
        if (round_up) {
            q += 1;
        }
        lsb_exp += drop;
    }
    const double mantissa = q.get_d();  // at most 2^53, exact
    const double out = std::ldexp(mantissa, static_cast<int>(lsb_exp));
    if (!std::isfinite(out)) {
        throw PreconditionError("to_double: magnitude overflows binary64");
    }
    return negative ? -out : out;
}

RatVec3 to_rat(const Vec3& v)
{
    return {to_rat(v.x), to_rat(v.y), to_rat(v.z)};
}

Vec3 to_double(const RatVec3& v)
{
    return {to_double(v.x), to_double(v.y), to_double(v.z)};
}

RatQuery RatQuery::from(const Query& q)
{
    RatQuery r;
    r.kind = q.kind();
    for (int i = 0; i < 4; ++i) {
        r.start[i] = to_rat(q.start()[i]);
        r.end[i] = to_rat(q.end()[i]);
    }
    return r;
}

Query RatQuery::to_query() const
{
    Query::Points s, e;
    for (int i = 0; i < 4; ++i) {
        s[i] = to_double(start[i]);
        e[i] = to_double(end[i]);
    }
    return {kind, s, e};
}

namespace {

Rat lerp(const Rat& a, const Rat& b, const Rat& t)
{
    return a + t * (b - a);
}

}  // namespace

RatVec3 rational_eval_F(const RatQuery& q, const Rat& t, const Rat& u, const Rat& v)
{
    RatVec3 out;
    for (int k = 0; k < 3; ++k) {
        std::array<Rat, 4> p;
        for (int i = 0; i < 4; ++i) {
            p[i] = lerp(q.start[i][k], q.end[i][k], t);
        }
        if (q.kind == QueryKind::VertexFace) {
            out[k] = p[0] - ((1 - u - v) * p[1] + u * p[2] + v * p[3]);
        } else {
            out[k] = ((1 - u) * p[0] + u * p[1]) - ((1 - v) * p[2] + v * p[3]);
        }
    }
    return out;
}

RatVec3 rational_eval_F(const Query& q, const Rat& t, const Rat& u, const Rat& v)
{
    return rational_eval_F(RatQuery::from(q), t, u, v);
}

bool verify_root(const RatQuery& q, const RootWitness& w, const Rat& separation)
{
    auto in_unit = [](const Rat& x) { return sgn(x) >= 0 && x <= 1; };
    if (!in_unit(w.t) || !in_unit(w.u) || !in_unit(w.v)) {
        return false;
    }
    if (q.kind == QueryKind::VertexFace && w.u + w.v > 1) {
        return false;
    }
    const RatVec3 f = rational_eval_F(q, w.t, w.u, w.v);
    for (int k = 0; k < 3; ++k) {
        if (abs(f[k]) > separation) {
            return false;
        }
    }
    return true;
}

namespace {

// F is affine in each of t, u, v with no u*v term, so per axis
//   F = (A + B t + C u + D v + E t u + G t v) / M
// with integers A..G and M > 0. Box endpoints are kept as integers over
// denominators T = Qt 2^Lt, U = 2^Lu, V = 2^Lv, so every corner test is an
// integer comparison without any gcd reduction.
struct AxisPoly {
    mpz_class A, B, C, D, E, G;
    mpz_class M;
    double inv_m = 1.0;
};

struct ExactBox {
    // Integer endpoints {lo, hi} of each dimension and bisection depth.
    std::array<mpz_class, 2> t, u, v;
    std::array<int, 3> depth{0, 0, 0};
};

mpz_class lcm_of(std::initializer_list<const mpz_class*> values)
{
    mpz_class out = 1;
    for (const mpz_class* v : values) {
        mpz_lcm(out.get_mpz_t(), out.get_mpz_t(), v->get_mpz_t());
    }
    return out;
}

class Certifier {
public:
    Certifier(const RatQuery& q, const CertifyOptions& opts) : opts_(opts), vf_(q.kind == QueryKind::VertexFace)
    {
        for (int k = 0; k < 3; ++k) {
            std::array<Rat, 4> p0, dp;
            for (int i = 0; i < 4; ++i) {
                p0[i] = q.start[i][k];
                dp[i] = q.end[i][k] - q.start[i][k];
            }
            // Rational coefficients of A + B t + C u + D v + E t u + G t v.
            std::array<Rat, 6> c;
            if (vf_) {
                c[0] = p0[0] - p0[1];
                c[1] = dp[0] - dp[1];
                c[2] = p0[1] - p0[2];
                c[3] = p0[1] - p0[3];
                c[4] = dp[1] - dp[2];
                c[5] = dp[1] - dp[3];
            } else {
                c[0] = p0[0] - p0[2];
                c[1] = dp[0] - dp[2];
                c[2] = p0[1] - p0[0];
                c[3] = p0[2] - p0[3];
                c[4] = dp[1] - dp[0];
                c[5] = dp[2] - dp[3];
            }
            mpz_class m = 1;
            for (const Rat& x : c) {
                mpz_lcm(m.get_mpz_t(), m.get_mpz_t(), x.get_den_mpz_t());
            }
            std::array<mpz_class, 6> z;
            for (int j = 0; j < 6; ++j) {
                z[j] = c[j].get_num() * (m / c[j].get_den());
            }
            axes_[k] = {z[0], z[1], z[2], z[3], z[4], z[5], m, 1.0 / m.get_d()};
            // |F| > d  <=>  |N| dd > dn M T U V for the scaled corner value N.
            sep_scale_[k] = opts.separation.get_num() * m;
        }
        sep_den_ = opts.separation.get_den();
        t_den_ = lcm_of({&opts.t_lo.get_den(), &opts.t_hi.get_den()});
    }

    OracleVerdict run()
    {
        OracleVerdict out;
        if (opts_.t_lo > opts_.t_hi) {
            out.kind = OracleVerdictKind::NoRoot;  // empty time range
            return out;
        }
        std::vector<ExactBox> stack;
        {
            ExactBox root;
            root.t = {opts_.t_lo.get_num() * (t_den_ / opts_.t_lo.get_den()),
                      opts_.t_hi.get_num() * (t_den_ / opts_.t_hi.get_den())};
            root.u = {mpz_class(0), mpz_class(1)};
            root.v = {mpz_class(0), mpz_class(1)};
            stack.push_back(std::move(root));
        }
        while (!stack.empty()) {
            ExactBox box = std::move(stack.back());
            stack.pop_back();
            if (++out.boxes > opts_.max_boxes) {
                out.kind = OracleVerdictKind::Undetermined;
                return out;
            }
            std::array<double, 3> spread{};
            if (!evaluate(box, spread)) {
                continue;  // excluded
            }
            int dim = -1;
            double best = -1.0;
            for (int k = 0; k < 3; ++k) {
                if (box.depth[k] < opts_.depth_cap && spread[k] > best) {
                    best = spread[k];
                    dim = k;
                }
            }
            if (dim < 0) {
                out.kind = OracleVerdictKind::Undetermined;
                return out;
            }
            ExactBox a = box;
            ExactBox& b = box;
            auto& ia = dim == 0 ? a.t : (dim == 1 ? a.u : a.v);
            auto& ib = dim == 0 ? b.t : (dim == 1 ? b.u : b.v);
            // Refine the denominator by 2: [2lo, lo+hi] and [lo+hi, 2hi].
            const mpz_class mid = ia[0] + ia[1];
            ia[0] *= 2;
            ia[1] = mid;
            ib[0] = mid;
            ib[1] *= 2;
            ++a.depth[dim];
            ++b.depth[dim];
            if (!vf_ || prism_alive(b)) {
                stack.push_back(std::move(b));
            }
            if (!vf_ || prism_alive(a)) {
                stack.push_back(std::move(a));
            }
        }
        out.kind = OracleVerdictKind::NoRoot;
        return out;
    }

private:
    // u.lo + v.lo <= 1 with u = b/2^Lu, v = c/2^Lv.
    static bool prism_alive(const ExactBox& box)
    {
        const int lu = box.depth[1];
        const int lv = box.depth[2];
        mpz_class lhs_u, lhs_v, rhs;
        mpz_mul_2exp(lhs_u.get_mpz_t(), box.u[0].get_mpz_t(), static_cast<mp_bitcnt_t>(lv));
        mpz_mul_2exp(lhs_v.get_mpz_t(), box.v[0].get_mpz_t(), static_cast<mp_bitcnt_t>(lu));
        rhs = 1;
        mpz_mul_2exp(rhs.get_mpz_t(), rhs.get_mpz_t(), static_cast<mp_bitcnt_t>(lu + lv));
        return lhs_u + lhs_v <= rhs;
    }

    // Returns false when the exact corner box misses the cube [-d, d]^3.
    // Otherwise fills `spread` with the largest corner-value change along
    // each domain dimension (used only to pick the split direction).
    bool evaluate(const ExactBox& box, std::array<double, 3>& spread)
    {
        spread = {0.0, 0.0, 0.0};
        const auto lt = static_cast<mp_bitcnt_t>(box.depth[0]);
        const auto lu = static_cast<mp_bitcnt_t>(box.depth[1]);
        const auto lv = static_cast<mp_bitcnt_t>(box.depth[2]);
        mpz_mul_2exp(T_.get_mpz_t(), t_den_.get_mpz_t(), lt);
        // Scale back to F for the split heuristic: F = N / (M T U V).
        const double inv_tuv = std::ldexp(1.0 / T_.get_d(), -static_cast<int>(lu + lv));

        for (int k = 0; k < 3; ++k) {
            const AxisPoly& P = axes_[k];
            for (int ti = 0; ti < 2; ++ti) {
                const mpz_class& a = box.t[ti];
                alpha_ = P.A * T_;
                alpha_ += P.B * a;
                beta_ = P.C * T_;
                beta_ += P.E * a;
                gamma_ = P.D * T_;
                gamma_ += P.G * a;
                mpz_mul_2exp(alpha_.get_mpz_t(), alpha_.get_mpz_t(), lu + lv);
                for (int ui = 0; ui < 2; ++ui) {
                    tmp_ = beta_ * box.u[ui];
                    mpz_mul_2exp(tmp_.get_mpz_t(), tmp_.get_mpz_t(), lv);
                    tmp_ += alpha_;
                    for (int vi = 0; vi < 2; ++vi) {
                        mpz_class& n = corner_[ti * 4 + ui * 2 + vi];
                        n = gamma_ * box.v[vi];
                        mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), lu);
                        n += tmp_;
                    }
                }
            }
            const mpz_class* lo = &corner_[0];
            const mpz_class* hi = &corner_[0];
            for (int i = 1; i < 8; ++i) {
                if (corner_[i] < *lo) {
                    lo = &corner_[i];
                }
                if (corner_[i] > *hi) {
                    hi = &corner_[i];
                }
            }
            // Threshold dn M T U V, compared against N dd.
            bound_ = sep_scale_[k] * T_;
            mpz_mul_2exp(bound_.get_mpz_t(), bound_.get_mpz_t(), lu + lv);
            lhs_ = *lo * sep_den_;
            if (lhs_ > bound_) {
                return false;
            }
            lhs_ = *hi * sep_den_;
            if (lhs_ < -bound_) {
                return false;
            }
            constexpr std::array<int, 3> bit{4, 2, 1};
            const double scale = P.inv_m * inv_tuv;
            for (int i = 0; i < 8; ++i) {
                approx_[i] = corner_[i].get_d() * scale;
            }
            for (int dim = 0; dim < 3; ++dim) {
                for (int i = 0; i < 8; ++i) {
                    if (!(i & bit[dim])) {
                        spread[dim] = std::max(spread[dim], std::abs(approx_[i] - approx_[i | bit[dim]]));
                    }
                }
            }
        }
        return true;
    }

    const CertifyOptions& opts_;
    bool vf_;
    std::array<AxisPoly, 3> axes_;
    std::array<mpz_class, 3> sep_scale_;
    mpz_class sep_den_;
    mpz_class t_den_;
    mpz_class T_, alpha_, beta_, gamma_, tmp_, bound_, lhs_;
    std::array<mpz_class, 8> corner_;
    std::array<double, 8> approx_{};
};

}  // namespace

OracleVerdict certify_no_root(const RatQuery& q, const CertifyOptions& opts)
{
    if (opts.depth_cap < 1) {
        throw UsageError("certify_no_root: depth_cap must be >= 1");
    }
    if (sgn(opts.separation) < 0) {
        throw UsageError("certify_no_root: separation must be non-negative");
    }
    Certifier c(q, opts);
    return c.run();
}

// ---------------------------------------------------------------------------
// Exact univariate polynomials (coefficients low -> high).

namespace {

using Poly = std::vector<Rat>;

void trim(Poly& p)
{
    while (!p.empty() && sgn(p.back()) == 0) {
        p.pop_back();
    }
}

Rat eval(const Poly& p, const Rat& x)
{
    Rat acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

Poly derivative(const Poly& p)
{
    Poly d;
    for (std::size_t i = 1; i < p.size(); ++i) {
        d.push_back(p[i] * static_cast<long>(i));
    }
    trim(d);
    return d;
}

// Polynomial long division; b must be nonzero.
std::pair<Poly, Poly> divmod(Poly a, const Poly& b)
{
    trim(a);
    if (a.size() < b.size()) {
        return {Poly{}, a};
    }
    Poly q(a.size() - b.size() + 1);
    while (!a.empty() && a.size() >= b.size()) {
        const std::size_t shift = a.size() - b.size();
        const Rat coef = a.back() / b.back();
        q[shift] = coef;
        for (std::size_t i = 0; i < b.size(); ++i) {
            a[i + shift] -= coef * b[i];
        }
        a.pop_back();  // leading term cancels exactly
        trim(a);
    }
    trim(q);
    return {q, a};
}

Poly gcd(Poly a, Poly b)
{
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

int sign_variations(const std::vector<Poly>& seq, const Rat& x)
{
    int count = 0;
    int prev = 0;
    for (const Poly& p : seq) {
        const int s = sgn(eval(p, x));
        if (s == 0) {
            continue;
        }
        if (prev != 0 && s != prev) {
            ++count;
        }
        prev = s;
    }
    return count;
}

Poly cubic_poly(const Rat& a, const Rat& b, const Rat& c, const Rat& d)
{
    Poly p{d, c, b, a};
    trim(p);
    return p;
}

}  // namespace

CubicIsolation isolate_cubic_roots(const Rat& a, const Rat& b, const Rat& c, const Rat& d)
{
    CubicIsolation out;
    const Poly p = cubic_poly(a, b, c, d);
    if (p.empty()) {
        out.infinitely_many = true;
        return out;
    }
    if (p.size() == 1) {
        return out;
    }
    const Poly g = gcd(p, derivative(p));
    const Poly sf = g.size() > 1 ? divmod(p, g).first : p;

    std::vector<Poly> sturm{sf, derivative(sf)};
    while (sturm.back().size() > 1) {
        Poly r = divmod(sturm[sturm.size() - 2], sturm.back()).second;
        if (r.empty()) {
            break;
        }
        for (Rat& x : r) {
            x = -x;
        }
        sturm.push_back(std::move(r));
    }

    if (sgn(eval(sf, Rat(0))) == 0) {
        out.intervals.push_back({Rat(0), Rat(0)});
    }
    // Roots in the half-open interval (lo, hi] equal V(lo) - V(hi).
    struct Pending {
        Rat lo, hi;
        int vlo, vhi;
    };
    std::vector<Pending> work{{Rat(0), Rat(1), sign_variations(sturm, Rat(0)), sign_variations(sturm, Rat(1))}};
    std::vector<RootInterval> found;
    while (!work.empty()) {
        Pending w = std::move(work.back());
        work.pop_back();
        const int n = w.vlo - w.vhi;
        if (n <= 0) {
            continue;
        }
        if (n == 1) {
            if (sgn(eval(sf, w.hi)) == 0) {
                found.push_back({w.hi, w.hi});
            } else {
                found.push_back({w.lo, w.hi});
            }
            continue;
        }
        const Rat mid = (w.lo + w.hi) / 2;
        const int vm = sign_variations(sturm, mid);
        work.push_back({mid, w.hi, vm, w.vhi});
        work.push_back({w.lo, mid, w.vlo, vm});
    }
    std::sort(found.begin(), found.end(), [](const RootInterval& x, const RootInterval& y) { return x.lo < y.lo; });
    out.intervals.insert(out.intervals.end(), found.begin(), found.end());
    return out;
}

RootInterval refine_root(const Rat& a, const Rat& b, const Rat& c, const Rat& d, RootInterval iv, const Rat& width)
{
    const Poly p = cubic_poly(a, b, c, d);
    if (p.empty()) {
        throw UsageError("refine_root: zero polynomial");
    }
    // Every root of the square-free part is a sign change.
    const Poly g = gcd(p, derivative(p));
    const Poly sf = g.size() > 1 ? divmod(p, g).first : p;
    while (iv.hi - iv.lo > width) {
        if (sgn(eval(sf, iv.hi)) == 0) {
            iv.lo = iv.hi;
            break;
        }
        const Rat mid = (iv.lo + iv.hi) / 2;
        const int sm = sgn(eval(sf, mid));
        if (sm == 0) {
            iv.lo = iv.hi = mid;
            break;
        }
        if (sm == sgn(eval(sf, iv.hi))) {
            iv.hi = mid;
        } else {
            iv.lo = mid;
        }
    }
    return iv;
}

std::optional<Rat> cubic_inflection(const Rat& a, const Rat& b, const Rat& c, const Rat& d)
{
    (void)c;
    (void)d;
    if (sgn(a) == 0) {
        return std::nullopt;
    }
    const Rat s = -b / (3 * a);
    // f''(t) = 6 a t + 2 b
    auto second = [&](const Rat& t) -> Rat { return 6 * a * t + 2 * b; };
    const Rat h(1, 1 << 20);
    if (sgn(second(s)) != 0 || sgn(second(s - h)) == sgn(second(s + h))) {
        return std::nullopt;
    }
    return s;
}

std::array<Rat, 4> rational_coplanarity_cubic(const RatQuery& q)
{
    // Each vector is linear in t: value at 0 plus slope * t.
    auto diff = [&](int to, int from) {
        std::array<std::array<Rat, 3>, 2> r;  // [at0, slope]
        for (int k = 0; k < 3; ++k) {
            r[0][k] = q.start[to][k] - q.start[from][k];
            r[1][k] = (q.end[to][k] - q.end[from][k]) - r[0][k];
        }
        return r;
    };
    std::array<std::array<Rat, 3>, 2> a, b, r;
    if (q.kind == QueryKind::VertexFace) {
        a = diff(2, 1);
        b = diff(3, 1);
        r = diff(0, 1);
    } else {
        a = diff(1, 0);
        b = diff(3, 2);
        r = diff(2, 0);
    }
    auto crs = [](const std::array<Rat, 3>& x, const std::array<Rat, 3>& y) {
        return std::array<Rat, 3>{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
    };
    auto dt = [](const std::array<Rat, 3>& x, const std::array<Rat, 3>& y) {
        return Rat(x[0] * y[0] + x[1] * y[1] + x[2] * y[2]);
    };
    const auto n0 = crs(a[0], b[0]);
    auto n1 = crs(a[0], b[1]);
    const auto n1b = crs(a[1], b[0]);
    for (int k = 0; k < 3; ++k) {
        n1[k] += n1b[k];
    }
    const auto n2 = crs(a[1], b[1]);
    return {dt(n2, r[1]), Rat(dt(n1, r[1]) + dt(n2, r[0])), Rat(dt(n0, r[1]) + dt(n1, r[0])), dt(n0, r[0])};
}

}  // namespace ccd::oracle
