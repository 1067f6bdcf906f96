#pragma once

#include "atdvp/mps.hpp"

#include <iosfwd>
#include <string>

namespace atdvp {

enum class Bath { A, B };

struct ObservableSet {
    double time = 0.0;
    double sz = 0.0, sx = 0.0, sy = 0.0;
    double j_a = 0.0, j_b = 0.0;
    double energy = 0.0;
    double norm = 0.0;
};

/// <sigma_y (x) (a_0 + a_0^dag)> across the junction between the spin and the
/// selected bath's first chain mode, normalized by the squared norm. This is
/// the plotted flux operator itself; a physical heat current would carry the
/// chain coupling c_0 as a prefactor.
double heat_flux(const MPS& psi, int spin_site, Bath which);

/// Spin expectations, both fluxes, energy and norm in one record.
ObservableSet measure_all(const MPS& psi, const MPO& hamiltonian, int spin_site, double t);

std::string timeseries_header();
std::string timeseries_row(const ObservableSet& o);

}  // namespace atdvp
