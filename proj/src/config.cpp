#include "angio/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "angio/errors.hpp"

namespace angio {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_reals(const std::string& key, const std::string& value) {
    std::istringstream ss(value);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) {
        size_t used = 0;
        double v = 0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size())
            throw ConfigError("config: key '" + key + "': '" + tok + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("config: key '" + key + "' has no value");
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    const auto v = parse_reals(key, value);
    if (v.size() != 1) throw ConfigError("config: key '" + key + "' expects one value");
    return v[0];
}

long parse_int(const std::string& key, const std::string& value) {
    const double v = parse_real(key, value);
    const long i = static_cast<long>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("config: key '" + key + "' expects an integer");
    return i;
}

void check_range(const std::string& key, double v, double lo, double hi) {
    if (!(v >= lo && v <= hi))
        throw ConfigError("config: key '" + key + "' = " + std::to_string(v) +
                          " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);

    RunConfig cfg;
    bool explicit_V_an = false;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: line " + std::to_string(lineno) + ": empty key");

        ModelParams& p = cfg.params;
        StepControls& c = cfg.controls;
        if (key == "case") {
            if (value == "sphere")
                cfg.kind = CaseKind::Sphere;
            else if (value == "resection")
                cfg.kind = CaseKind::Resection;
            else if (value == "custom")
                cfg.kind = CaseKind::Custom;
            else
                throw ConfigError("config: case must be sphere, resection or custom, got '" +
                                  value + "'");
        } else if (key == "mesh") {
            cfg.mesh_path = value;
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "dim") {
            cfg.dim = static_cast<int>(parse_int(key, value));
        } else if (key == "box") {
            cfg.box = parse_real(key, value);
        } else if (key == "h") {
            cfg.h = parse_real(key, value);
        } else if (key == "center") {
            cfg.center = parse_reals(key, value);
        } else if (key == "radius") {
            cfg.radius = parse_real(key, value);
        } else if (key == "phi_v0") {
            cfg.phi_v0 = parse_real(key, value);
        } else if (key == "shell_fraction") {
            cfg.shell_fraction = parse_real(key, value);
        } else if (key == "irc_width") {
            cfg.irc_width = parse_real(key, value);
        } else if (key == "wm_band") {
            const auto v = parse_reals(key, value);
            if (v.size() != 2) throw ConfigError("config: wm_band expects two values x0 x1");
            cfg.wm_x0 = v[0];
            cfg.wm_x1 = v[1];
        } else if (key == "seed") {
            cfg.seed = static_cast<unsigned long>(parse_int(key, value));
        } else if (key == "t_end") {
            cfg.t_end = parse_real(key, value);
        } else if (key == "cadence") {
            cfg.cadence = static_cast<int>(parse_int(key, value));
        } else if (key == "radio" || key == "chemo") {
            const auto v = parse_reals(key, value);
            if (v.size() != 3)
                throw ConfigError("config: " + key + " expects 't0 t1 rate'");
            TherapyInterval iv{v[0], v[1], v[2]};
            if (!(iv.t0 < iv.t1)) throw ConfigError("config: " + key + " interval needs t0 < t1");
            if (iv.rate < 0) throw ConfigError("config: " + key + " rate must be >= 0");
            (key == "radio" ? cfg.therapy.radio : cfg.therapy.chemo).push_back(iv);
        } else if (key == "probe") {
            const auto v = parse_reals(key, value);
            if (v.size() != 5 && v.size() != 7)
                throw ConfigError("config: probe expects 'x0 y0 [z0] x1 y1 [z1] samples'");
            const size_t d = (v.size() - 1) / 2;
            ProbeSpec ps;
            ps.from.assign(v.begin(), v.begin() + d);
            ps.to.assign(v.begin() + d, v.begin() + 2 * d);
            ps.samples = static_cast<int>(v.back());
            if (ps.samples < 2) throw ConfigError("config: probe needs at least 2 samples");
            cfg.probes.push_back(ps);
        } else if (key == "Pi") {
            p.Pi = parse_real(key, value);
        } else if (key == "eps") {
            p.eps = parse_real(key, value);
        } else if (key == "phi_bar") {
            p.phi_bar = parse_real(key, value);
        } else if (key == "L_v") {
            p.L_v = parse_real(key, value);
        } else if (key == "L_d") {
            p.L_d = parse_real(key, value);
        } else if (key == "L_a_inv") {
            p.L_a_inv = parse_real(key, value);
        } else if (key == "h_v") {
            p.h_v = parse_real(key, value);
        } else if (key == "h_a") {
            p.h_a = parse_real(key, value);
        } else if (key == "wm_factor") {
            p.wm_factor = parse_real(key, value);
        } else if (key == "b_n") {
            p.b_n = parse_real(key, value);
        } else if (key == "b_c") {
            p.b_c = parse_real(key, value);
        } else if (key == "l_nv") {
            p.l_nv = parse_real(key, value);
        } else if (key == "l_ca") {
            p.l_ca = parse_real(key, value);
        } else if (key == "nu") {
            p.nu = parse_real(key, value);
        } else if (key == "nu_d") {
            p.nu_d = parse_real(key, value);
        } else if (key == "delta_n") {
            p.delta_n = parse_real(key, value);
            check_range(key, p.delta_n, 0.0, 1.0);
        } else if (key == "delta_c") {
            p.delta_c = parse_real(key, value);
            check_range(key, p.delta_c, 0.0, 1.0);
        } else if (key == "k1") {
            p.k1 = parse_real(key, value);
        } else if (key == "k2") {
            p.k2 = parse_real(key, value);
        } else if (key == "k3") {
            p.k3 = parse_real(key, value);
        } else if (key == "V_n") {
            p.V_n = parse_real(key, value);
        } else if (key == "V_T") {
            p.V_T = parse_real(key, value);
        } else if (key == "V_an") {
            p.V_an = parse_real(key, value);
            explicit_V_an = true;
        } else if (key == "V_a") {
            p.V_a = parse_real(key, value);
        } else if (key == "V_c") {
            p.V_c = parse_real(key, value);
        } else if (key == "delta_v") {
            p.delta_v = parse_real(key, value);
        } else if (key == "delta_a") {
            p.delta_a = parse_real(key, value);
        } else if (key == "phi_bar_a") {
            p.phi_bar_a = parse_real(key, value);
            check_range(key, p.phi_bar_a, 1e-12, 1.0);
        } else if (key == "hr_width") {
            p.hr_width = parse_real(key, value);
        } else if (key == "outer_tol") {
            c.outer_tol = parse_real(key, value);
        } else if (key == "max_outer") {
            c.max_outer = static_cast<int>(parse_int(key, value));
        } else if (key == "proj_tol") {
            c.proj_tol = parse_real(key, value);
        } else if (key == "max_inner") {
            c.max_inner = static_cast<int>(parse_int(key, value));
        } else if (key == "mu") {
            c.mu = parse_real(key, value);
        } else if (key == "omega") {
            c.omega = parse_real(key, value);
        } else if (key == "dt_scale") {
            c.dt_scale = parse_real(key, value);
        } else if (key == "dt_cap") {
            c.dt_cap = parse_real(key, value);
        } else if (key == "max_halvings") {
            c.max_halvings = static_cast<int>(parse_int(key, value));
        } else {
            throw ConfigError("config: unknown key '" + key + "' at line " +
                              std::to_string(lineno));
        }
    }

    if (!explicit_V_an) cfg.params.V_an = cfg.params.V_T / cfg.params.phi_bar_a;

    // Cross-field validation.
    if (cfg.dim != 2 && cfg.dim != 3) throw ConfigError("config: dim must be 2 or 3");
    if (!(cfg.t_end > 0)) throw ConfigError("config: t_end must be positive");
    if (cfg.cadence < 1) throw ConfigError("config: cadence must be >= 1");
    if (!(cfg.box > 0)) throw ConfigError("config: box must be positive");
    if (!(cfg.h > 0)) throw ConfigError("config: h must be positive");
    if (!(cfg.radius > 0)) throw ConfigError("config: radius must be positive");
    check_range("phi_v0", cfg.phi_v0, 0.0, 1.0 - 1e-6);
    check_range("shell_fraction", cfg.shell_fraction, 0.0, 1.0);
    if (!(cfg.irc_width > 0)) throw ConfigError("config: irc_width must be positive");
    if (!cfg.center.empty() && static_cast<int>(cfg.center.size()) != cfg.dim)
        throw ConfigError("config: center needs one coordinate per dimension");
    for (const auto& ps : cfg.probes)
        if (static_cast<int>(ps.from.size()) != cfg.dim)
            throw ConfigError("config: probe coordinates do not match dim");
    check_range("phi_bar", cfg.params.phi_bar, 1e-6, 1.0 - 1e-6);
    if (!(cfg.params.Pi > 0) || !(cfg.params.eps > 0))
        throw ConfigError("config: Pi and eps must be positive");
    if (!(cfg.params.L_v > 0) || !(cfg.params.L_d > 0))
        throw ConfigError("config: L_v and L_d must be positive");
    if (cfg.params.L_a_inv < 0) throw ConfigError("config: L_a_inv must be >= 0");
    if (!(cfg.params.hr_width > 0)) throw ConfigError("config: hr_width must be positive");
    if (cfg.params.V_n < 0 || cfg.params.V_T < 0 || cfg.params.V_an < 0 || cfg.params.V_a < 0 ||
        cfg.params.V_c < 0 || cfg.params.delta_v < 0 || cfg.params.delta_a < 0)
        throw ConfigError("config: supply and consumption rates must be >= 0");
    if (cfg.kind == CaseKind::Custom) {
        if (cfg.mesh_path.empty()) throw ConfigError("config: custom case requires mesh = <path>");
        std::ifstream probe_mesh(cfg.mesh_path);
        if (!probe_mesh) throw ConfigError("config: mesh file not found: " + cfg.mesh_path);
    }
    if (cfg.controls.max_outer < 1 || cfg.controls.max_inner < 1 || cfg.controls.max_halvings < 0)
        throw ConfigError("config: iteration caps must be positive");
    if (!(cfg.controls.outer_tol > 0) || !(cfg.controls.proj_tol > 0))
        throw ConfigError("config: tolerances must be positive");
    if (!(cfg.controls.dt_scale > 0)) throw ConfigError("config: dt_scale must be positive");
    return cfg;
}

void write_config_echo(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open config echo for writing: " + path);
    char buf[128];
    auto real = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << key << " = " << buf << "\n";
    };
    auto integer = [&](const char* key, long v) { out << key << " = " << v << "\n"; };

    out << "# resolved run configuration\n";
    out << "case = "
        << (cfg.kind == CaseKind::Sphere     ? "sphere"
            : cfg.kind == CaseKind::Resection ? "resection"
                                              : "custom")
        << "\n";
    if (!cfg.mesh_path.empty()) out << "mesh = " << cfg.mesh_path << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    integer("dim", cfg.dim);
    real("box", cfg.box);
    real("h", cfg.h);
    if (!cfg.center.empty()) {
        out << "center =";
        for (double v : cfg.center) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            out << buf;
        }
        out << "\n";
    }
    real("radius", cfg.radius);
    real("phi_v0", cfg.phi_v0);
    real("shell_fraction", cfg.shell_fraction);
    real("irc_width", cfg.irc_width);
    if (cfg.wm_x0 < cfg.wm_x1) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g", cfg.wm_x0, cfg.wm_x1);
        out << "wm_band = " << buf << "\n";
    }
    integer("seed", static_cast<long>(cfg.seed));
    real("t_end", cfg.t_end);
    integer("cadence", cfg.cadence);

    const ModelParams& p = cfg.params;
    real("Pi", p.Pi);
    real("eps", p.eps);
    real("phi_bar", p.phi_bar);
    real("L_v", p.L_v);
    real("L_d", p.L_d);
    real("L_a_inv", p.L_a_inv);
    real("h_v", p.h_v);
    real("h_a", p.h_a);
    real("wm_factor", p.wm_factor);
    real("b_n", p.b_n);
    real("b_c", p.b_c);
    real("l_nv", p.l_nv);
    real("l_ca", p.l_ca);
    real("nu", p.nu);
    real("nu_d", p.nu_d);
    real("delta_n", p.delta_n);
    real("delta_c", p.delta_c);
    real("k1", p.k1);
    real("k2", p.k2);
    real("k3", p.k3);
    real("V_n", p.V_n);
    real("V_T", p.V_T);
    real("V_an", p.V_an);
    real("V_a", p.V_a);
    real("V_c", p.V_c);
    real("delta_v", p.delta_v);
    real("delta_a", p.delta_a);
    real("phi_bar_a", p.phi_bar_a);
    real("hr_width", p.hr_width);

    const StepControls& c = cfg.controls;
    real("outer_tol", c.outer_tol);
    integer("max_outer", c.max_outer);
    real("proj_tol", c.proj_tol);
    integer("max_inner", c.max_inner);
    real("mu", c.mu);
    real("omega", c.omega);
    real("dt_scale", c.dt_scale);
    real("dt_cap", c.dt_cap);
    integer("max_halvings", c.max_halvings);

    for (const auto& iv : cfg.therapy.radio) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", iv.t0, iv.t1, iv.rate);
        out << "radio = " << buf << "\n";
    }
    for (const auto& iv : cfg.therapy.chemo) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", iv.t0, iv.t1, iv.rate);
        out << "chemo = " << buf << "\n";
    }
    for (const auto& ps : cfg.probes) {
        out << "probe =";
        for (double v : ps.from) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            out << buf;
        }
        for (double v : ps.to) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            out << buf;
        }
        out << " " << ps.samples << "\n";
    }
    if (!out) throw IoError("failed writing config echo: " + path);
}

}  // namespace angio
