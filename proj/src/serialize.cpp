#include "minoverlap/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace minoverlap::serialize {

using json = nlohmann::ordered_json;
using programs::ConicProgram;
using programs::Constraint;
using programs::DepTag;
using programs::ProgramInput;
using programs::ProgramKind;

std::string hex_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_double(const std::string& s) {
    const char* p = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(p, &end);
    if (end == p) throw std::invalid_argument("parse_double: bad number '" + s + "'");
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << text;
}

namespace {

json num(double v) {
    json j;
    j["dec"] = v;
    j["hex"] = hex_double(v);
    return j;
}

double num_in(const json& j) {
    if (j.is_object()) return parse_double(j.at("hex").get<std::string>());
    if (j.is_string()) return parse_double(j.get<std::string>());
    return j.get<double>();
}

json hex_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(hex_double(x));
    return a;
}

std::vector<double> hex_array_in(const json& a) {
    std::vector<double> v;
    v.reserve(a.size());
    for (const auto& x : a) v.push_back(num_in(x));
    return v;
}

json input_to_json(const ProgramInput& in) {
    json j;
    j["kind"] = in.kind == ProgramKind::lp ? "lp" : "full";
    j["N"] = in.N;
    j["T"] = in.T;
    j["R"] = in.R;
    j["h1"] = num(in.h1);
    j["h2"] = num(in.h2);
    j["p1"] = num(in.p1);
    j["p2"] = num(in.p2);
    j["q1"] = num(in.q1);
    j["q2"] = num(in.q2);
    j["sine8"] = in.sine8;
    return j;
}

ProgramInput input_from_json(const json& j) {
    ProgramInput in;
    in.kind = j.at("kind").get<std::string>() == "lp" ? ProgramKind::lp : ProgramKind::full;
    in.N = j.at("N").get<int>();
    in.T = j.at("T").get<int>();
    in.R = j.at("R").get<int>();
    in.h1 = num_in(j.at("h1"));
    in.h2 = num_in(j.at("h2"));
    in.p1 = num_in(j.at("p1"));
    in.p2 = num_in(j.at("p2"));
    in.q1 = num_in(j.at("q1"));
    in.q2 = num_in(j.at("q2"));
    in.sine8 = j.value("sine8", false);
    return in;
}

const char* dep_name(DepTag t) {
    switch (t) {
        case DepTag::fixed: return "fixed";
        case DepTag::mean_h1: return "mean_h1";
        case DepTag::mome_h2: return "mome_h2";
        case DepTag::c1_lo: return "c1_lo";
        case DepTag::c1_hi: return "c1_hi";
        case DepTag::d1_lo: return "d1_lo";
        case DepTag::d1_hi: return "d1_hi";
        case DepTag::cos_up: return "cos_up";
    }
    return "fixed";
}

DepTag dep_from(const std::string& s) {
    for (int i = 0; i <= int(DepTag::cos_up); ++i)
        if (s == dep_name(DepTag(i))) return DepTag(i);
    throw std::invalid_argument("unknown dep tag: " + s);
}

json row_to_json(const programs::AffineRow& r) {
    json j;
    j["offset"] = hex_double(r.offset);
    j["idx"] = r.idx;
    json vals = json::array();
    for (double v : r.val) vals.push_back(hex_double(v));
    j["val"] = vals;
    return j;
}

programs::AffineRow row_from_json(const json& j) {
    programs::AffineRow r;
    r.offset = parse_double(j.at("offset").get<std::string>());
    r.idx = j.at("idx").get<std::vector<int32_t>>();
    for (const auto& v : j.at("val")) r.val.push_back(parse_double(v.get<std::string>()));
    if (r.idx.size() != r.val.size()) throw std::invalid_argument("row: idx/val length mismatch");
    return r;
}

}  // namespace

// ---------------- certificates ----------------

std::string certificate_to_json(const certify::Certificate& cert) {
    json j;
    j["format"] = "minoverlap-certificate-v1";
    j["input"] = input_to_json(cert.input);
    {
        json o;
        o["value"] = cert.objective;
        o["value_hex"] = hex_double(cert.objective);
        o["error_bound_hex"] = hex_double(cert.objective_error_bound);
        o["certified"] = cert.certified;
        o["certified_hex"] = hex_double(cert.certified);
        j["objective"] = o;
    }
    j["pass"] = cert.pass;
    j["weak"] = cert.weak;
    if (cert.input.kind == ProgramKind::full) {
        json nm;
        nm["mean"] = hex_double(cert.named.mean);
        nm["mome"] = hex_double(cert.named.mome);
        nm["cosup"] = hex_double(cert.named.cosup);
        nm["c1_lo"] = hex_double(cert.named.c1_lo);
        nm["c1_hi"] = hex_double(cert.named.c1_hi);
        j["named_multipliers"] = nm;
    }
    {
        json v;
        v["rows_checked"] = cert.rows_checked;
        v["min_margin"] = cert.min_margin;
        v["min_margin_row"] = cert.min_margin_row;
        v["worst_ratio"] = cert.worst_ratio;
        v["worst_ratio_row"] = cert.worst_ratio_row;
        j["verification"] = v;
    }
    {
        json s;
        s["status"] = cert.meta.status;
        s["eps"] = cert.meta.eps;
        s["iters"] = cert.meta.iters;
        s["max_iters"] = cert.meta.max_iters;
        s["alpha"] = cert.meta.alpha;
        s["polish_target"] = cert.meta.polish_target;
        s["polish_theta"] = cert.meta.polish_theta;
        s["pres"] = cert.meta.pres;
        s["dres"] = cert.meta.dres;
        s["gap"] = cert.meta.gap;
        j["solver"] = s;
    }

    // Multipliers grouped by constraint family, in emission order. Cone
    // blocks carry their z vectors alongside.
    const auto prog = cert.input.kind == ProgramKind::lp
                          ? programs::build_lp(cert.input.N, cert.input.R)
                          : programs::build_full(cert.input);
    if (prog.cons.size() != cert.point.y.size())
        throw std::invalid_argument("certificate: point does not match the input's program");
    json point;
    for (size_t i = 0; i < prog.cons.size(); ++i) {
        const auto& c = prog.cons[i];
        const char* fam = programs::family_name(c.family);
        if (!point.contains(fam)) {
            point[fam] = json::object();
            point[fam]["y"] = json::array();
            if (c.is_cone()) point[fam]["z"] = json::array();
        }
        point[fam]["y"].push_back(hex_double(cert.point.y[i]));
        if (c.is_cone()) point[fam]["z"].push_back(hex_array(cert.point.z[i]));
    }
    j["point"] = point;
    return j.dump(1);
}

certify::Certificate certificate_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "minoverlap-certificate-v1")
        throw std::invalid_argument("certificate: unknown format tag");
    certify::Certificate cert;
    cert.input = input_from_json(j.at("input"));
    cert.objective = parse_double(j.at("objective").at("value_hex").get<std::string>());
    cert.objective_error_bound =
        parse_double(j.at("objective").at("error_bound_hex").get<std::string>());
    cert.certified = parse_double(j.at("objective").at("certified_hex").get<std::string>());
    cert.pass = j.at("pass").get<bool>();
    cert.weak = j.at("weak").get<bool>();
    if (j.contains("named_multipliers")) {
        const auto& nm = j.at("named_multipliers");
        cert.named.mean = parse_double(nm.at("mean").get<std::string>());
        cert.named.mome = parse_double(nm.at("mome").get<std::string>());
        cert.named.cosup = parse_double(nm.at("cosup").get<std::string>());
        cert.named.c1_lo = parse_double(nm.at("c1_lo").get<std::string>());
        cert.named.c1_hi = parse_double(nm.at("c1_hi").get<std::string>());
    }
    if (j.contains("verification")) {
        const auto& v = j.at("verification");
        cert.rows_checked = v.at("rows_checked").get<int>();
        cert.min_margin = v.at("min_margin").get<double>();
        cert.min_margin_row = v.at("min_margin_row").get<std::string>();
        cert.worst_ratio = v.at("worst_ratio").get<double>();
        cert.worst_ratio_row = v.at("worst_ratio_row").get<std::string>();
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        cert.meta.status = s.at("status").get<std::string>();
        cert.meta.eps = s.at("eps").get<double>();
        cert.meta.iters = s.at("iters").get<int>();
        cert.meta.max_iters = s.value("max_iters", 0);
        cert.meta.alpha = s.at("alpha").get<double>();
        cert.meta.polish_target = s.at("polish_target").get<double>();
        cert.meta.polish_theta = s.at("polish_theta").get<double>();
        cert.meta.pres = s.value("pres", 0.0);
        cert.meta.dres = s.value("dres", 0.0);
        cert.meta.gap = s.value("gap", 0.0);
    }

    const auto prog = cert.input.kind == ProgramKind::lp
                          ? programs::build_lp(cert.input.N, cert.input.R)
                          : programs::build_full(cert.input);
    const auto& point = j.at("point");
    cert.point.y.assign(prog.cons.size(), 0.0);
    cert.point.z.resize(prog.cons.size());
    std::map<std::string, size_t> cursor;
    for (size_t i = 0; i < prog.cons.size(); ++i) {
        const auto& c = prog.cons[i];
        const char* fam = programs::family_name(c.family);
        const size_t at = cursor[fam]++;
        const auto& blk = point.at(fam);
        cert.point.y[i] = parse_double(blk.at("y").at(at).get<std::string>());
        if (c.is_cone()) {
            cert.point.z[i] = hex_array_in(blk.at("z").at(at));
            if (cert.point.z[i].size() != c.norm.size())
                throw std::invalid_argument("certificate: cone block size mismatch at " + c.name());
        }
    }
    return cert;
}

void save_certificate(const certify::Certificate& cert, const std::string& path) {
    write_file(path, certificate_to_json(cert));
}

certify::Certificate load_certificate(const std::string& path) {
    return certificate_from_json(read_file(path));
}

// ---------------- programs ----------------

std::string program_to_json(const ConicProgram& prog) {
    json j;
    j["format"] = "minoverlap-program-v1";
    j["input"] = input_to_json(prog.input);
    j["num_vars"] = prog.num_vars();
    j["objective"] = row_to_json(prog.objective);
    json cons = json::array();
    for (const auto& c : prog.cons) {
        json cj;
        cj["family"] = programs::family_name(c.family);
        cj["i0"] = c.i0;
        cj["pivot"] = c.pivot;
        cj["dep"] = dep_name(c.dep);
        cj["bound"] = row_to_json(c.bound);
        if (c.is_cone()) {
            json rows = json::array();
            for (const auto& nr : c.norm) rows.push_back(row_to_json(nr));
            cj["norm"] = rows;
        }
        cons.push_back(std::move(cj));
    }
    j["constraints"] = cons;
    return j.dump(1);
}

ConicProgram program_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "minoverlap-program-v1")
        throw std::invalid_argument("program: unknown format tag");
    ConicProgram prog;
    prog.input = input_from_json(j.at("input"));
    prog.layout = programs::VarLayout{prog.input.N, prog.input.T, prog.input.R,
                                      prog.input.kind == ProgramKind::lp};
    prog.objective = row_from_json(j.at("objective"));
    if (j.at("num_vars").get<int>() != prog.num_vars())
        throw std::invalid_argument("program: num_vars does not match the input block");
    for (const auto& cj : j.at("constraints")) {
        Constraint c{programs::family_from_name(cj.at("family").get<std::string>()),
                     cj.at("i0").get<int32_t>(),
                     {},
                     {},
                     dep_from(cj.at("dep").get<std::string>()),
                     cj.at("pivot").get<bool>()};
        c.bound = row_from_json(cj.at("bound"));
        if (cj.contains("norm"))
            for (const auto& nr : cj.at("norm")) c.norm.push_back(row_from_json(nr));
        prog.cons.push_back(std::move(c));
    }
    return prog;
}

void save_program(const ConicProgram& prog, const std::string& path) {
    write_file(path, program_to_json(prog));
}

ConicProgram load_program(const std::string& path) {
    return program_from_json(read_file(path));
}

// ---------------- sweep plans ----------------

SweepPlan plan_from_json(const std::string& text) {
    const json j = json::parse(text);
    SweepPlan plan;
    for (const auto& job : j.at("jobs")) {
        SweepJob sj;
        sj.input = input_from_json(job);
        sj.label = job.value("label", "");
        plan.jobs.push_back(std::move(sj));
    }
    if (j.contains("target_box")) {
        const auto& b = j.at("target_box");
        plan.target_box.h_lo = num_in(b.at("h").at(0));
        plan.target_box.h_hi = num_in(b.at("h").at(1));
        plan.target_box.p_lo = num_in(b.at("p").at(0));
        plan.target_box.p_hi = num_in(b.at("p").at(1));
        plan.has_target = true;
    }
    plan.threshold = j.value("threshold", 0.0);
    plan.guard = j.value("guard", 1e-7);
    return plan;
}

SweepPlan load_plan(const std::string& path) { return plan_from_json(read_file(path)); }

std::string plan_to_json(const SweepPlan& plan) {
    json j;
    json jobs = json::array();
    for (const auto& job : plan.jobs) {
        json jj = input_to_json(job.input);
        if (!job.label.empty()) jj["label"] = job.label;
        jobs.push_back(std::move(jj));
    }
    j["jobs"] = jobs;
    if (plan.has_target) {
        json b;
        b["h"] = {plan.target_box.h_lo, plan.target_box.h_hi};
        b["p"] = {plan.target_box.p_lo, plan.target_box.p_hi};
        j["target_box"] = b;
    }
    j["threshold"] = plan.threshold;
    j["guard"] = plan.guard;
    return j.dump(1);
}

// ---------------- region reports ----------------

std::string regions_to_csv(const std::vector<certify::EllipseRegion>& regions) {
    std::ostringstream out;
    out << "index,kind,threshold,anchor_h,anchor_p,K,ch,cp,qh,qp,center_h,center_p,semi_h,semi_p\n";
    out.precision(17);
    int i = 0;
    for (const auto& r : regions) {
        const char* kind = "?";
        switch (r.kind) {
            case certify::EllipseRegion::Kind::empty: kind = "empty"; break;
            case certify::EllipseRegion::Kind::ellipse: kind = "ellipse"; break;
            case certify::EllipseRegion::Kind::parabolic: kind = "parabolic"; break;
            case certify::EllipseRegion::Kind::halfplane: kind = "halfplane"; break;
            case certify::EllipseRegion::Kind::whole_plane: kind = "whole_plane"; break;
        }
        out << i++ << ',' << kind << ',' << r.threshold << ',' << r.anchor_h << ',' << r.anchor_p
            << ',' << r.K << ',' << r.ch << ',' << r.cp << ',' << r.qh << ',' << r.qp << ','
            << r.center_h << ',' << r.center_p << ',' << r.semi_h << ',' << r.semi_p << '\n';
    }
    return out.str();
}

std::string regions_to_svg(const std::vector<certify::EllipseRegion>& regions,
                           const certify::Box2& box) {
    // Map (h, p) onto a 800x600 canvas with a 10% margin.
    const double W = 800, H = 600;
    const double mh = std::max(1e-12, (box.h_hi - box.h_lo) * 0.1);
    const double mp = std::max(1e-12, (box.p_hi - box.p_lo) * 0.1);
    const double h0 = box.h_lo - mh, h1 = box.h_hi + mh;
    const double p0 = box.p_lo - mp, p1 = box.p_hi + mp;
    auto X = [&](double h) { return (h - h0) / (h1 - h0) * W; };
    auto Y = [&](double p) { return H - (p - p0) / (p1 - p0) * H; };
    auto SX = [&](double dh) { return dh / (h1 - h0) * W; };
    auto SY = [&](double dp) { return dp / (p1 - p0) * H; };

    std::ostringstream out;
    out.precision(10);
    out << "<svg xmlns='http://www.w3.org/2000/svg' viewBox='0 0 " << W << ' ' << H << "'>\n";
    out << "<rect x='" << X(box.h_lo) << "' y='" << Y(box.p_hi) << "' width='"
        << SX(box.h_hi - box.h_lo) << "' height='" << SY(box.p_hi - box.p_lo)
        << "' fill='none' stroke='black' stroke-width='1'/>\n";
    const char* colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                            "#66a61e", "#e6ab02", "#a6761d", "#666666"};
    int i = 0;
    for (const auto& r : regions) {
        const char* col = colors[i % 8];
        if (r.kind == certify::EllipseRegion::Kind::ellipse) {
            out << "<ellipse cx='" << X(r.center_h) << "' cy='" << Y(r.center_p) << "' rx='"
                << SX(r.semi_h) << "' ry='" << SY(r.semi_p) << "' fill='" << col
                << "' fill-opacity='0.25' stroke='" << col << "'/>\n";
        }
        out << "<circle cx='" << X(r.anchor_h) << "' cy='" << Y(r.anchor_p)
            << "' r='3' fill='" << col << "'/>\n";
        out << "<text x='" << X(r.anchor_h) + 5 << "' y='" << Y(r.anchor_p) - 5
            << "' font-size='11'>" << i << "</text>\n";
        ++i;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace minoverlap::serialize
