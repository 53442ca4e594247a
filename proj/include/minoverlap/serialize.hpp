#pragma once

// File formats. All binary64 payloads are serialized as C hexfloat strings
// so that save/load round-trips are bit-exact; human-oriented decimal
// duplicates appear where they help reading the file.

#include <string>
#include <vector>

#include "minoverlap/certify.hpp"
#include "minoverlap/program.hpp"

namespace minoverlap::serialize {

std::string hex_double(double v);
double parse_double(const std::string& s);  // hexfloat or decimal

// ---- certificates ----
std::string certificate_to_json(const certify::Certificate& cert);
certify::Certificate certificate_from_json(const std::string& text);
void save_certificate(const certify::Certificate& cert, const std::string& path);
certify::Certificate load_certificate(const std::string& path);

// ---- programs ----
std::string program_to_json(const programs::ConicProgram& prog);
programs::ConicProgram program_from_json(const std::string& text);
void save_program(const programs::ConicProgram& prog, const std::string& path);
programs::ConicProgram load_program(const std::string& path);

// ---- sweep plans ----
struct SweepJob {
    programs::ProgramInput input;
    std::string label;
};
struct SweepPlan {
    std::vector<SweepJob> jobs;
    certify::Box2 target_box;               // (h, p) box the ellipse phase must cover
    double threshold = 0.0;                 // bound claimed over the target box
    double guard = 1e-7;
    bool has_target = false;
};
SweepPlan plan_from_json(const std::string& text);
SweepPlan load_plan(const std::string& path);
std::string plan_to_json(const SweepPlan& plan);

// ---- region reports ----
std::string regions_to_csv(const std::vector<certify::EllipseRegion>& regions);
std::string regions_to_svg(const std::vector<certify::EllipseRegion>& regions,
                           const certify::Box2& box);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace minoverlap::serialize
