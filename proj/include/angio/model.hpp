#pragma once

#include <vector>

#include "angio/types.hpp"

namespace angio {

// Parameters of the four-phase model in mm / day / Pa units. Defaults are the
// low-supply vascularized case (V_T = V_n/10).
struct ModelParams {
    double Pi = 694.0;        // cell-cell adhesion scale [Pa]
    double eps = 0.013;       // interface width [mm]
    double phi_bar = 0.389;   // equilibrium tumor fraction (potential minimum)
    double L_v = 3900.0;      // viable-phase friction [Pa day / mm^2]
    double L_d = 3900.0;      // necrotic-phase friction [Pa day / mm^2]
    double L_a_inv = 0.003;   // vasculature mobility 1/L_a
    double h_v = 0.14;        // nutrient chemotaxis of viable cells (CSF/GM value)
    double h_a = 0.2264;      // TAF chemotaxis of the vasculature
    double wm_factor = 4.0;   // white-matter multiplier on h_v and l_nv
    double b_n = 1.0;         // nutrient diffusivity relative to water
    double b_c = 0.589;       // TAF diffusivity relative to water
    double l_nv = 111.42;     // nutrient release by viable cells (CSF/GM value)
    double l_ca = 0.73;       // TAF release by the vasculature
    double nu = 0.15;         // proliferation rate [1/day]
    double nu_d = 0.06;       // hypoxic death rate [1/day]
    double delta_n = 0.33;    // hypoxia threshold
    double delta_c = 0.2;     // TAF threshold for vasculature growth
    double k1 = 0.0;          // viable -> necrotic background rate
    double k2 = 0.0;          // necrotic lysis rate
    double k3 = 0.24;         // vasculature regression rate [1/day]
    double V_n = 1e4;         // nutrient supply in healthy tissue [1/day]
    double V_T = 1e3;         // nutrient supply inside the tumor [1/day]
    double V_an = 2.5e4;      // supply through the new vasculature, V_T/phi_bar_a
    double V_a = 4.8;         // vasculature growth rate [1/day]
    double V_c = 1e3;         // TAF production rate [1/day]
    double delta_v = 8640.0;  // nutrient consumption by viable cells [1/day]
    double delta_a = 864.0;   // TAF uptake by the vasculature [1/day]
    double phi_bar_a = 0.04;  // reference vasculature fraction
    double hr_width = 0.1;    // width of the regularized Heaviside ramp
};

struct TherapyInterval {
    double t0 = 0.0, t1 = 0.0, rate = 0.0;
};

// Radiotherapy / chemotherapy dose windows; rates add where windows overlap.
// Windows are half-open [t0, t1).
struct TherapySchedule {
    std::vector<TherapyInterval> radio;
    std::vector<TherapyInterval> chemo;
};

// k_T,1(t) = k_T,2(t) = k_R(t) + k_C(t)
double therapy_rate(const TherapySchedule& s, double t);

// Single-well potential psi and its convex/concave splitting psi = psi1 + psi2
// with psi1 = -(1-phi_bar) log(1-phi), treated implicitly by the scheme.
double psi(double phi, double phi_bar);
double psi_prime(double phi, double phi_bar);
double psi1_prime(double phi, double phi_bar);
double psi1_second(double phi, double phi_bar);
double psi2_prime(double phi, double phi_bar);

// C^1 cubic ramp: 0 for s <= 0, 1 for s >= width, 3u^2 - 2u^3 between.
double heaviside_reg(double s, double width);

// Degenerate mobility b_i = phi_i (1 - phi_v - phi_d)^2 / (L_i (1 + phi_a)^2).
double mobility(double phi_i, double phi_T, double phi_a, double L_i);
// The same without the 1/L_i factor; this dimensionless form appears in the
// chemotactic flux and in the defect-correction bracket [1 - b].
double mobility_hat(double phi_i, double phi_T, double phi_a);

// Reaction terms Gamma_i / gamma and the chemical sources S_n, S_c, evaluated
// pointwise. irc is the smooth indicator of non-resected tissue (1 when no
// resection). k_t1/k_t2 are the therapy rates at the current time.
double source_viable(double phi_v, double phi_d, double phi_a, double n, double k_t1,
                     const ModelParams& p);
double source_necrotic(double phi_v, double phi_d, double n, double k_t2,
                       const ModelParams& p);
double source_angio(double phi_v, double phi_d, double phi_a, double c, double irc,
                    const ModelParams& p);
double source_nutrient(double phi_v, double phi_d, double phi_a, double n, double irc,
                       const ModelParams& p);
double source_taf(double phi_v, double phi_a, double n, double c, const ModelParams& p);

// Splitting S = supply - react * value used by the implicit chemical solves.
struct ReactionSplit {
    double react;
    double supply;
};
// S_n = supply - react * n, with the nutrient released by viable cells
// (l_nv phi_v, tissue-scaled by the caller) folded into `supply`.
ReactionSplit nutrient_split(double phi_v, double phi_d, double phi_a, double irc,
                             double l_nv_local, const ModelParams& p);
// S_c = supply - react * c at the already-updated nutrient value.
ReactionSplit taf_split(double phi_v, double phi_a, double n_new, const ModelParams& p);

// Spatially uniform equilibrium of the viable fraction at n = delta_n with
// phi_d = phi_a = 0: the root of V_T (1-phi)(1-delta_n) = delta_v phi delta_n.
double uniform_steady_state(const ModelParams& p);

}  // namespace angio
