#include "parocs/io.hpp"

#include <cstdio>
#include <fstream>

namespace parocs {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
    }
    fs::rename(tmp, path);
}

std::string field_to_csv(const Field& f) {
    const Grid& g = f.grid();
    std::string out = g.dim == 1 ? "i,j,x,t,value\n" : "i,j,x,x2,t,value\n";
    const int ns = g.n_space();
    for (int j = 0; j < f.time_count(); ++j) {
        const double t = f.role() == Role::nodal ? j * g.dt : (j + 1) * g.dt;
        for (int k = 0; k < ns; ++k) {
            const SpacePoint x = g.point(k);
            out += std::to_string(k) + "," + std::to_string(j) + "," + format_double(x[0]);
            if (g.dim == 2) out += "," + format_double(x[1]);
            out += "," + format_double(t) + "," + format_double(f.at(k, j)) + "\n";
        }
    }
    return out;
}

json field_to_json(const Field& f) {
    const Grid& g = f.grid();
    json j;
    j["grid"] = {{"dim", g.dim},         {"nx", g.nx},
                 {"nt", g.nt},           {"length", g.length},
                 {"horizon", g.horizon}};
    j["role"] = f.role() == Role::nodal ? "nodal" : "interval";
    j["values"] = f.values();
    return j;
}

Field field_from_json(const json& j) {
    const auto& jg = j.at("grid");
    Grid g = make_grid(jg.at("dim"), jg.at("nx"), jg.at("nt"), jg.at("length"),
                       jg.at("horizon"));
    const Role role = j.at("role") == "nodal" ? Role::nodal : Role::interval;
    Field f(g, role);
    const auto& vals = j.at("values");
    if (vals.size() != f.size()) throw ConfigError("field_from_json: size mismatch");
    for (std::size_t i = 0; i < f.size(); ++i) f.values()[i] = vals[i];
    f.check_finite("field_from_json");
    return f;
}

std::string iter_log_to_csv(const std::vector<IterRecord>& log) {
    std::string out = "iter,J,gap,step\n";
    for (const auto& r : log)
        out += std::to_string(r.iter) + "," + format_double(r.J) + "," +
               format_double(r.gap) + "," + format_double(r.step) + "\n";
    return out;
}

std::string sweep_to_csv(const StabilityReport& rep) {
    std::string out = "magnitude,dZ,dU_L1,dY_L2,dP_L2,iters,gap\n";
    for (const auto& r : rep.records)
        out += format_double(r.magnitude) + "," + format_double(r.dZ) + "," +
               format_double(r.du_l1) + "," + format_double(r.dy_l2) + "," +
               format_double(r.dp_l2) + "," + std::to_string(r.iters) + "," +
               format_double(r.gap) + "\n";
    return out;
}

std::string tikhonov_to_csv(const TikhonovPathReport& rep) {
    std::string out = "lambda,dU_L1,dY_L2,iters,gap,damping\n";
    for (const auto& r : rep.records)
        out += format_double(r.lambda) + "," + format_double(r.du_l1) + "," +
               format_double(r.dy_l2) + "," + std::to_string(r.iters) + "," +
               format_double(r.gap) + "," + format_double(r.damping_used) + "\n";
    return out;
}

json check_report_to_json(const CheckReport& rep) {
    json j;
    j["kind"] = rep.kind;
    j["seed"] = rep.seed;
    j["samples"] = rep.samples;
    j["admitted"] = rep.admitted;
    j["degenerate"] = rep.degenerate;
    j["min_ratio"] = rep.min_ratio;
    j["max_ratio"] = rep.max_ratio;
    j["constant_hat"] = rep.constant_hat;
    j["extra"] = rep.extra;
    j["flag"] = rep.flag;
    if (!rep.note.empty()) j["note"] = rep.note;
    return j;
}

json fit_to_json(const FitResult& fit) {
    return json{{"theta_hat", fit.theta},
                {"kappa_hat", fit.kappa},
                {"r_squared", fit.r_squared},
                {"ci_halfwidth", fit.ci_halfwidth},
                {"points", fit.points}};
}

json stability_report_to_json(const StabilityReport& rep) {
    json j;
    j["dz_metric"] = rep.dz_metric;
    j["run_mode"] = rep.run_mode;
    j["reference_theta_u"] = rep.reference_theta_u;
    j["reference_theta_yp"] = rep.reference_theta_yp;
    j["dropped_zero_u"] = rep.dropped_zero_u;
    j["dropped_zero_yp"] = rep.dropped_zero_yp;
    j["dropped_nonconverged"] = rep.dropped_nonconverged;
    if (rep.fit_u) j["fit_u"] = fit_to_json(*rep.fit_u);
    else j["no_fit_reason_u"] = rep.no_fit_reason_u;
    if (rep.fit_yp) j["fit_yp"] = fit_to_json(*rep.fit_yp);
    else j["no_fit_reason_yp"] = rep.no_fit_reason_yp;
    j["records"] = json::array();
    for (const auto& r : rep.records)
        j["records"].push_back({{"magnitude", r.magnitude},
                                {"dZ", r.dZ},
                                {"dU_L1", r.du_l1},
                                {"dY_L2", r.dy_l2},
                                {"dP_L2", r.dp_l2},
                                {"iters", r.iters},
                                {"gap", r.gap},
                                {"converged", r.converged}});
    return j;
}

json tikhonov_report_to_json(const TikhonovPathReport& rep) {
    json j;
    if (rep.control_fit) j["control_fit"] = fit_to_json(*rep.control_fit);
    if (rep.state_fit) j["state_fit"] = fit_to_json(*rep.state_fit);
    if (!rep.no_fit_reason.empty()) j["no_fit_reason"] = rep.no_fit_reason;
    j["dropped_zero"] = rep.dropped_zero;
    j["records"] = json::array();
    for (const auto& r : rep.records)
        j["records"].push_back({{"lambda", r.lambda},
                                {"dU_L1", r.du_l1},
                                {"dY_L2", r.dy_l2},
                                {"iters", r.iters},
                                {"gap", r.gap},
                                {"converged", r.converged},
                                {"damping", r.damping_used}});
    return j;
}

}  // namespace parocs
