#include <bit>
#include <cmath>

#include <gtest/gtest.h>

#include "delaymac/energy.hpp"
#include "support.hpp"

using namespace delaymac;
using testing_support::rel_err;

namespace {
const TechnologyProfile tech{};
const CellDesign base{};

MultiplierSpec spec_for(long long w) { return MultiplierSpec::from_signed(w, 5, 1e-6, 0.75); }
}  // namespace

TEST(CapEnergy, Values) {
    EXPECT_NEAR(energy::cap_energy(2.2e-15, tech), 3.168e-15, 1e-20);
    EXPECT_LT(std::abs(2 * energy::cap_energy(2.2e-15, tech) / 6.8e-15 - 1.0), 0.10);
    TechnologyProfile doubled = tech;
    doubled.v_dd *= 2.0;
    EXPECT_DOUBLE_EQ(energy::cap_energy(2.2e-15, doubled), 4.0 * energy::cap_energy(2.2e-15, tech));
    EXPECT_THROW(energy::cap_energy(0.0, tech), ValidationError);
}

TEST(ShortCircuit, FastRampVanishes) {
    const double slow = energy::short_circuit_energy(1e6, tech);
    EXPECT_GT(slow, 0.0);
    EXPECT_LT(energy::short_circuit_energy(1e30, tech), slow * 1e-20);
    EXPECT_THROW(energy::short_circuit_energy(0.0, tech), ValidationError);
}

TEST(ShortCircuit, ExponentialBlowUp) {
    const double r = base.discharge_rate();
    const double e0 = energy::short_circuit_energy(r, tech);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(energy::short_circuit_energy(std::ldexp(r, -i), tech), std::ldexp(e0, i));
    EXPECT_LT(rel_err(energy::multiplier_short_circuit_energy(5, r, tech), 63.0 * e0), 1e-12);
}

TEST(MacEnergy, FiveBitTotal) {
    const auto e = energy::mac_energy(spec_for(31), base, tech, energy::Mode::sense);
    EXPECT_LT(std::abs(e.total / 110e-15 - 1.0), 0.15);
    EXPECT_EQ(e.total, e.e_cstar + e.e_td1 + e.e_td2 + e.e_pu + e.e_inv);
    EXPECT_DOUBLE_EQ(e.per_bit, e.total / 5);
}

TEST(MacEnergy, SenseIndependentOfWeight) {
    const auto ref = energy::mac_energy(spec_for(31), base, tech, energy::Mode::sense);
    for (long long w = -31; w <= 31; ++w)
        EXPECT_EQ(energy::mac_energy(spec_for(w), base, tech, energy::Mode::sense).total, ref.total);
}

TEST(MacEnergy, AccelerationGrowsWithPopcount) {
    energy::EnergyConstants k;
    for (double rho : {0.0, 0.3, 1.0}) {
        k.recharge_fraction = rho;
        double by_pop[6];
        for (long long w = 0; w < 32; ++w) {
            const auto e = energy::mac_energy(spec_for(w), base, tech, energy::Mode::acceleration, k);
            by_pop[std::popcount(static_cast<unsigned>(w))] = e.total;
        }
        for (int p = 1; p <= 5; ++p) EXPECT_GE(by_pop[p], by_pop[p - 1]);
    }
}

TEST(MacEnergy, FullBypassChargesNothing) {
    const auto e = energy::mac_energy(spec_for(0), base, tech, energy::Mode::acceleration);
    EXPECT_EQ(e.e_cstar, 0.0);
    EXPECT_EQ(e.e_td1, 0.0);
    energy::EnergyConstants k;
    k.recharge_fraction = 1.5;
    EXPECT_THROW(energy::mac_energy(spec_for(0), base, tech, energy::Mode::acceleration, k), ValidationError);
}

TEST(ReferenceTable, RowSums) {
    EXPECT_NEAR(energy::reference_row_sum_per_bit(), 21.6, 1e-12);
    EXPECT_NEAR(energy::reference_row_sum_per_mac(), 110.4, 1e-12);
    EXPECT_NEAR(energy::reference_row_sum_per_mac(), energy::reference_total.per_mac_fj, 0.5);
    EXPECT_NEAR(energy::reference_row_sum_per_bit(), energy::reference_total.per_bit_fj, 0.5);
}

TEST(ReferenceTable, NodeCapacitanceInversion) {
    EXPECT_NEAR(energy::node_capacitance_from_energy(1.1e-15, 2, tech), 0.382e-15, 0.001e-15);
    EXPECT_NEAR(energy::node_capacitance_from_energy(1.7e-15, 2, tech), 0.59e-15, 0.001e-15);
}
