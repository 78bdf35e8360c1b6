#include "angio/model.hpp"

#include <algorithm>
#include <cmath>

#include "angio/errors.hpp"

namespace angio {

double therapy_rate(const TherapySchedule& s, double t) {
    double r = 0.0;
    for (const auto& iv : s.radio)
        if (t >= iv.t0 && t < iv.t1) r += iv.rate;
    for (const auto& iv : s.chemo)
        if (t >= iv.t0 && t < iv.t1) r += iv.rate;
    return r;
}

// psi(phi) = -(1-phi_bar) log(1-phi) - phi^3/3 - (1-phi_bar)(phi^2/2 + phi).
// The log part is the convex piece psi1, the polynomial the concave piece psi2.
double psi(double phi, double phi_bar) {
    const double a = 1.0 - phi_bar;
    return -a * std::log1p(-phi) - phi * phi * phi / 3.0 - a * (0.5 * phi * phi + phi);
}

double psi_prime(double phi, double phi_bar) {
    return psi1_prime(phi, phi_bar) + psi2_prime(phi, phi_bar);
}

double psi1_prime(double phi, double phi_bar) { return (1.0 - phi_bar) / (1.0 - phi); }

double psi1_second(double phi, double phi_bar) {
    const double g = 1.0 - phi;
    return (1.0 - phi_bar) / (g * g);
}

double psi2_prime(double phi, double phi_bar) {
    const double a = 1.0 - phi_bar;
    return -(phi * phi + a * phi + a);
}

double heaviside_reg(double s, double width) {
    if (s <= 0.0) return 0.0;
    if (s >= width) return 1.0;
    const double u = s / width;
    return u * u * (3.0 - 2.0 * u);
}

double mobility(double phi_i, double phi_T, double phi_a, double L_i) {
    return mobility_hat(phi_i, phi_T, phi_a) / L_i;
}

double mobility_hat(double phi_i, double phi_T, double phi_a) {
    const double g = 1.0 - phi_T;
    const double va = 1.0 + phi_a;
    return phi_i * g * g / (va * va);
}

double source_viable(double phi_v, double phi_d, double phi_a, double n, double k_t1,
                     const ModelParams& p) {
    const double free_space = 1.0 - phi_v - phi_d - phi_a;
    return p.nu * phi_v * std::max(0.0, n - p.delta_n) * free_space -
           p.nu_d * phi_v * std::max(0.0, p.delta_n - n) - (p.k1 + k_t1) * phi_v;
}

double source_necrotic(double phi_v, double phi_d, double n, double k_t2,
                       const ModelParams& p) {
    return p.k1 * phi_v + p.nu_d * phi_v * std::max(0.0, p.delta_n - n) -
           (p.k2 + k_t2) * phi_d;
}

double source_angio(double phi_v, double phi_d, double phi_a, double c, double irc,
                    const ModelParams& p) {
    const double outside = 1.0 - heaviside_reg(phi_v + phi_d, p.hr_width);
    const double growth =
        irc * p.V_a * (1.0 - phi_v - phi_d - phi_a) * std::max(0.0, c - p.delta_c);
    return outside * (growth - p.k3 * phi_a);
}

double source_nutrient(double phi_v, double phi_d, double phi_a, double n, double irc,
                       const ModelParams& p) {
    const double phi_T = phi_v + phi_d;
    const double H = heaviside_reg(phi_T, p.hr_width);
    const double supply = irc * (p.V_n * (1.0 - H) + p.V_T * H * (1.0 - phi_T)) + p.V_an * phi_a;
    return supply * (1.0 - n) - p.delta_v * phi_v * n;
}

double source_taf(double phi_v, double phi_a, double n, double c, const ModelParams& p) {
    return p.V_c * phi_v * std::max(0.0, p.delta_n - n) * (1.0 - c) - p.delta_a * phi_a * c;
}

ReactionSplit nutrient_split(double phi_v, double phi_d, double phi_a, double irc,
                             double l_nv_local, const ModelParams& p) {
    const double phi_T = phi_v + phi_d;
    const double H = heaviside_reg(phi_T, p.hr_width);
    const double supply_coef =
        irc * (p.V_n * (1.0 - H) + p.V_T * H * (1.0 - phi_T)) + p.V_an * phi_a;
    return {supply_coef + p.delta_v * phi_v, supply_coef + l_nv_local * phi_v};
}

ReactionSplit taf_split(double phi_v, double phi_a, double n_new, const ModelParams& p) {
    const double prod = p.V_c * phi_v * std::max(0.0, p.delta_n - n_new);
    return {prod + p.delta_a * phi_a, prod + p.l_ca * phi_a};
}

double uniform_steady_state(const ModelParams& p) {
    const double num = p.V_T * (1.0 - p.delta_n);
    const double den = num + p.delta_v * p.delta_n;
    if (den <= 0.0) throw ConfigError("uniform_steady_state: V_T(1-delta_n)+delta_v*delta_n <= 0");
    return num / den;
}

}  // namespace angio
