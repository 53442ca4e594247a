#include "minoverlap/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace minoverlap::certify {

using programs::Family;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double unit_roundoff() { return std::ldexp(1.0, -53); }

double fl_error_bound(int n, double abs_sum) {
    if (n < 1) throw std::invalid_argument("fl_error_bound: n must be >= 1");
    if (abs_sum < 0.0) throw std::invalid_argument("fl_error_bound: abs_sum must be >= 0");
    if (n == 1 || abs_sum == 0.0) return 0.0;
    const long double u = std::ldexp(1.0L, -53);
    const long double nm1 = n - 1;
    if (nm1 * u >= 0.5L) throw std::invalid_argument("fl_error_bound: n too large");
    const long double factor = (nm1 * u * (1.0L + u)) / (1.0L - nm1 * u);
    const double r = double(factor * (long double)abs_sum);
    return std::nextafter(r, kInf);
}

VerificationReport verify(const dual::DualProgram& d, const dual::DualPoint& pt,
                          const programs::ProgramInput& in) {
    const auto ev = dual::eval(d, pt, in);
    const auto& prog = d.p();

    VerificationReport rep;
    rep.rows.reserve(ev.rows.size());
    rep.pass = true;
    rep.min_margin = kInf;
    rep.worst_ratio = kInf;

    for (const auto& row : ev.rows) {
        RowCheck rc;
        rc.name = prog.cons[row.con].name();
        rc.margin = row.margin;
        rc.terms = row.terms;
        rc.abs_sum = row.abs_sum;
        // terms counts accumulated products; +1 covers their roundings on
        // top of the additions.
        rc.error_bound = row.terms > 1 ? fl_error_bound(row.terms + 1, row.abs_sum) : 0.0;
        rc.pass = rc.margin > rc.error_bound;
        if (row.cone && !(pt.y[row.con] > 0.0)) rc.pass = false;
        rep.rows_checked += 1;
        if (!rc.pass) {
            rep.rows_failed += 1;
            rep.pass = false;
            rep.failed_rows.push_back(rc.name);
        }
        if (rc.margin < rep.min_margin) {
            rep.min_margin = rc.margin;
            rep.min_margin_row = rc.name;
        }
        if (rc.error_bound > 0.0) {
            const double ratio = rc.margin / rc.error_bound;
            if (ratio < rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_ratio_row = rc.name;
                rep.worst_ratio_index = row.con;
            }
        }
        rep.rows.push_back(std::move(rc));
    }

    rep.objective = ev.objective.value;
    rep.objective_error_bound =
        ev.objective.terms > 1 ? fl_error_bound(ev.objective.terms + 1, ev.objective.abs_sum) : 0.0;
    rep.certified = std::nextafter(rep.objective - rep.objective_error_bound, -kInf);
    return rep;
}

Certificate make_certificate(const dual::DualProgram& d, const dual::DualPoint& pt,
                             const programs::ProgramInput& in,
                             const VerificationReport& report, const SolverMeta& meta) {
    Certificate cert;
    cert.input = in;
    cert.point = pt;
    cert.objective = report.objective;
    cert.objective_error_bound = report.objective_error_bound;
    cert.certified = report.certified;
    cert.pass = report.pass;
    cert.weak = report.certified < 0.25;
    cert.meta = meta;
    cert.rows_checked = report.rows_checked;
    cert.min_margin = report.min_margin;
    cert.min_margin_row = report.min_margin_row;
    cert.worst_ratio = report.worst_ratio;
    cert.worst_ratio_row = report.worst_ratio_row;

    if (in.kind == programs::ProgramKind::full) {
        const auto& prog = d.p();
        const double N = in.N;
        auto grab = [&](Family f, int i0) {
            const int at = prog.find(f, i0);
            return at < 0 ? 0.0 : pt.y[at];
        };
        cert.named.mean = grab(Family::mean, 1) * (2.0 / N);
        cert.named.mome = grab(Family::mome, 1) * (2.0 / N);
        cert.named.cosup = grab(Family::cosup, 1) * (1.0 / N);
        cert.named.c1_lo = grab(Family::c1bnd, 1);
        cert.named.c1_hi = grab(Family::c1bnd, 2);
    }
    return cert;
}

double reuse_objective(const Certificate& cert, double h1, double h2, double p1, double p2) {
    if (cert.input.kind != programs::ProgramKind::full)
        throw std::invalid_argument("reuse_objective: full-program certificates only");
    const auto& in = cert.input;
    const double N = in.N;
    const auto& nm = cert.named;

    const double t1 = (N / 4.0) * 2.0 * (h1 - in.h1) * nm.mean;
    const double t2 = (N / 4.0) * (in.h2 * in.h2 - h2 * h2) * nm.mome;
    const double t3 = (N / 4.0) * 2.0 * (in.p2 * in.p2 - p2 * p2) * nm.cosup;
    const double t4 = (p1 - in.p1) * nm.c1_lo;
    const double t5 = (in.p2 - p2) * nm.c1_hi;
    const double delta = t1 + t2 + t3 + t4 + t5;
    const double abs_sum = std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4) + std::abs(t5);
    // Each term carries a handful of roundings; 16 slots over-count safely.
    const double eb = fl_error_bound(16, abs_sum);
    return cert.certified + delta - eb;
}

EllipseRegion ellipse(const Certificate& cert, double threshold) {
    if (cert.input.kind != programs::ProgramKind::full)
        throw std::invalid_argument("ellipse: full-program certificates only");
    const auto& in = cert.input;
    const auto& nm = cert.named;
    const double N = in.N;

    EllipseRegion r;
    r.threshold = threshold;
    r.anchor_h = in.h1;
    r.anchor_p = in.p2;
    r.qh = (N / 4.0) * nm.mome;
    r.qp = (N / 2.0) * nm.cosup;
    r.ch = (N / 2.0) * nm.mean;
    r.cp = nm.c1_lo - nm.c1_hi;
    r.K = cert.certified - threshold - (N / 2.0) * nm.mean * in.h1 +
          (N / 4.0) * nm.mome * in.h2 * in.h2 + (N / 2.0) * nm.cosup * in.p2 * in.p2 -
          nm.c1_lo * in.p1 + nm.c1_hi * in.p2;

    if (r.qh < 0.0 || r.qp < 0.0)
        throw std::domain_error("ellipse: negative quadratic coefficient (invalid multipliers)");

    if (r.qh > 0.0 && r.qp > 0.0) {
        r.center_h = r.ch / (2.0 * r.qh);
        r.center_p = r.cp / (2.0 * r.qp);
        const double rho = r.K + r.ch * r.ch / (4.0 * r.qh) + r.cp * r.cp / (4.0 * r.qp);
        if (rho < 0.0) {
            r.kind = EllipseRegion::Kind::empty;
        } else {
            r.kind = EllipseRegion::Kind::ellipse;
            r.semi_h = std::sqrt(rho / r.qh);
            r.semi_p = std::sqrt(rho / r.qp);
        }
        return r;
    }
    // Degenerate axes: either a parabolic strip or a half plane or trivial.
    if (r.qh == 0.0 && r.qp == 0.0) {
        r.kind = (r.ch == 0.0 && r.cp == 0.0)
                     ? (r.K >= 0.0 ? EllipseRegion::Kind::whole_plane : EllipseRegion::Kind::empty)
                     : EllipseRegion::Kind::halfplane;
        return r;
    }
    r.kind = EllipseRegion::Kind::parabolic;
    return r;
}

namespace {
// Worst-case |gradient| components over the box.
void lipschitz_components(const EllipseRegion& r, const Box2& box, double* lh, double* lp) {
    const double hmax = std::max(std::abs(box.h_lo), std::abs(box.h_hi));
    const double pmax = std::max(std::abs(box.p_lo), std::abs(box.p_hi));
    *lh = std::abs(r.ch) + 2.0 * r.qh * hmax;
    *lp = std::abs(r.cp) + 2.0 * r.qp * pmax;
}
}  // namespace

CoverResult covers(const std::vector<EllipseRegion>& regions, const Box2& box, double guard) {
    CoverResult res;
    if (!(box.h_lo <= box.h_hi && box.p_lo <= box.p_hi))
        throw std::invalid_argument("covers: malformed box");
    if (!(guard > 0.0)) throw std::invalid_argument("covers: guard must be positive");
    if (regions.empty()) {
        res.reason = "no regions";
        res.witness_h = box.h_lo;
        res.witness_p = box.p_lo;
        return res;
    }

    double lip = 0.0;
    for (const auto& r : regions) {
        double lh = 0.0, lp = 0.0;
        lipschitz_components(r, box, &lh, &lp);
        lip = std::max(lip, std::hypot(lh, lp));
    }
    res.lipschitz = lip;

    // Spacing so that guard >= lipschitz * delta, grid capped per axis.
    constexpr int kMaxCells = 2048;
    const double span_h = box.h_hi - box.h_lo, span_p = box.p_hi - box.p_lo;
    const double delta = lip > 0.0 ? guard / lip : std::max(span_h, span_p);
    auto cells = [&](double span) {
        if (span == 0.0 || delta <= 0.0) return 1;
        return int(std::min(4.0 * kMaxCells, std::ceil(span / delta)));
    };
    int nh = cells(span_h), np = cells(span_p);
    if (nh > kMaxCells || np > kMaxCells) {
        res.reason = "guard too small for the grid cap";
        res.witness_h = box.h_lo;
        res.witness_p = box.p_lo;
        return res;
    }
    res.cells_h = nh;
    res.cells_p = np;
    res.delta = std::max(span_h / nh, span_p / np);
    if (lip > 0.0 && guard < lip * res.delta) {
        res.reason = "guard below lipschitz * delta";
        res.witness_h = box.h_lo;
        res.witness_p = box.p_lo;
        return res;
    }

    auto cell_ok = [&](double h0, double h1, double p0, double p1) {
        const double hm = (h0 + h1) / 2.0, pm = (p0 + p1) / 2.0;
        for (const auto& r : regions) {
            if (r.kind == EllipseRegion::Kind::empty) continue;
            if (r.value(h0, p0) >= guard && r.value(h0, p1) >= guard &&
                r.value(h1, p0) >= guard && r.value(h1, p1) >= guard &&
                r.value(hm, pm) >= guard)
                return true;
        }
        return false;
    };

    for (int i = 0; i < nh; ++i) {
        const double h0 = box.h_lo + span_h * i / nh;
        const double h1 = (i + 1 == nh) ? box.h_hi : box.h_lo + span_h * (i + 1) / nh;
        for (int j = 0; j < np; ++j) {
            const double p0 = box.p_lo + span_p * j / np;
            const double p1 = (j + 1 == np) ? box.p_hi : box.p_lo + span_p * (j + 1) / np;
            if (!cell_ok(h0, h1, p0, p1)) {
                res.reason = "cell not inside any region";
                res.witness_h = (h0 + h1) / 2.0;
                res.witness_p = (p0 + p1) / 2.0;
                return res;
            }
        }
    }
    res.covered = true;
    return res;
}

void enforce_envelope(double certified) {
    if (certified > kUpperEnvelope)
        throw std::logic_error("certified bound exceeds the known upper bound: construction bug");
    if (certified < kLowerEnvelope)
        throw std::logic_error("certified bound fell below the mass floor: solver quality bug");
}

}  // namespace minoverlap::certify
