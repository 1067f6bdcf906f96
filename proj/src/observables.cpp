#include "atdvp/observables.hpp"

#include "atdvp/model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace atdvp {

namespace {

Tensor displacement(std::size_t levels) {
    Tensor t = boson_annihilation(levels);
    t += boson_creation(levels);
    return t;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double heat_flux(const MPS& psi, int spin_site, Bath which) {
    if (spin_site <= 0 || spin_site + 1 >= psi.length())
        throw std::invalid_argument("heat_flux: spin must have a chain site on both sides");
    if (psi.phys_dim(spin_site) != 2)
        throw std::invalid_argument("heat_flux: site " + std::to_string(spin_site) + " is not a spin");
    cplx val;
    if (which == Bath::A) {
        const int mode = spin_site - 1;
        val = expect_two_site(psi, displacement(psi.phys_dim(mode)), mode, pauli_y(), spin_site);
    } else {
        const int mode = spin_site + 1;
        val = expect_two_site(psi, pauli_y(), spin_site, displacement(psi.phys_dim(mode)), mode);
    }
    return std::real(val);
}

ObservableSet measure_all(const MPS& psi, const MPO& hamiltonian, int spin_site, double t) {
    ObservableSet o;
    o.time = t;
    o.sz = std::real(expect_local(psi, pauli_z(), spin_site));
    o.sx = std::real(expect_local(psi, pauli_x(), spin_site));
    o.sy = std::real(expect_local(psi, pauli_y(), spin_site));
    o.j_a = heat_flux(psi, spin_site, Bath::A);
    o.j_b = heat_flux(psi, spin_site, Bath::B);
    o.energy = std::real(expect_mpo(psi, hamiltonian));
    o.norm = mps_norm(psi);
    const double bound = 1.0 + 1e-9;
    if (!(o.norm > 0.0) || std::abs(o.sz) > bound || std::abs(o.sx) > bound ||
        std::abs(o.sy) > bound)
        throw std::runtime_error("measure_all: spin expectations left the Bloch ball; the state "
                                 "is corrupted");
    return o;
}

std::string timeseries_header() { return "t,sz,sx,sy,Ja,Jb,energy,norm"; }

std::string timeseries_row(const ObservableSet& o) {
    return fmt(o.time) + "," + fmt(o.sz) + "," + fmt(o.sx) + "," + fmt(o.sy) + "," + fmt(o.j_a) +
           "," + fmt(o.j_b) + "," + fmt(o.energy) + "," + fmt(o.norm);
}

}  // namespace atdvp
