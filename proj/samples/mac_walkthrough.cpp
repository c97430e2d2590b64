// Walks one signed multiply through the cell, jitter and energy models.

#include <iostream>

#include "delaymac/delaymac.hpp"

using namespace delaymac;

int main() {
    const TechnologyProfile tech;
    const CellDesign cell;

    const auto init = cell::initial_drop(1.0, cell, tech);
    std::cout << "initial drop at V_A = 1.0 V: " << init.dv0 << " V\n";
    std::cout << "minimum C* for a valid init: " << cell::init_validity_min_cstar(cell, tech) << " F\n";
    std::cout << "latch delay: " << cell::latch_delay(init.dv0, cell, tech).t_d << " s\n";

    const auto spec = MultiplierSpec::from_signed(-21, 5, 1e-6, 0.75);
    const auto r = mult::simulate_multiply({}, spec, 1.0, cell, tech);
    std::cout << "W = -21, V_A = 1.0 V: delta_t = " << r.delta_t << " s\n";

    const auto e = energy::mac_energy(MultiplierSpec::from_signed(31, 5, 1e-6, 0.75), cell, tech, energy::Mode::sense);
    std::cout << "energy per 5-bit MAC: " << e.total << " J\n";
}
