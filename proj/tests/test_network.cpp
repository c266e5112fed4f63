#include <catch_amalgamated.hpp>

#include "invergrid/network.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <numbers>
#include <random>

using namespace invergrid;
using Catch::Approx;

namespace {

const Load& load_at(const NetworkModel& net, const std::string& bus)
{
    auto it = std::find_if(net.loads.begin(), net.loads.end(), [&](const Load& l) { return l.bus == bus; });
    REQUIRE(it != net.loads.end());
    return *it;
}

bool mentions(const std::vector<std::string>& issues, const std::string& needle)
{
    return std::any_of(issues.begin(), issues.end(), [&](const auto& s) { return s.find(needle) != std::string::npos; });
}

NetworkModel random_radial(int n, std::mt19937_64& rng)
{
    NetworkModel net;
    for (int i = 0; i < n; ++i)
        net.buses.push_back({"B" + std::to_string(i)});
    std::uniform_real_distribution<double> len(0.005, 0.2);
    for (auto [a, b] : oracle::random_tree(n, rng))
        net.lines.push_back(make_line("B" + std::to_string(a), "B" + std::to_string(b),
                                      rng() % 2 ? CableType::UG1 : CableType::UG3, len(rng)));
    net.slack.bus = "B0";
    return net;
}

} // namespace

TEST_CASE("benchmark feeder carries the tabulated loads", "[network]")
{
    const NetworkModel net = build_cigre_lv_residential();

    CHECK(load_at(net, "R1").active_power_kw == 190.0);
    CHECK(load_at(net, "R1").reactive_power_kvar == 62.45);
    CHECK(load_at(net, "R11").active_power_kw == 14.25);
    CHECK(load_at(net, "R11").reactive_power_kvar == 4.68);
    CHECK(load_at(net, "R15").active_power_kw == 49.4);
    CHECK(load_at(net, "R15").reactive_power_kvar == 16.24);
    CHECK(load_at(net, "R16").active_power_kw == 52.25);
    CHECK(load_at(net, "R16").reactive_power_kvar == 17.17);
    CHECK(load_at(net, "R17").active_power_kw == 33.25);
    CHECK(load_at(net, "R17").reactive_power_kvar == 10.93);
    CHECK(load_at(net, "R18").active_power_kw == 44.65);
    CHECK(load_at(net, "R18").reactive_power_kvar == 14.68);
    CHECK(net.loads.size() == 6);
}

TEST_CASE("benchmark feeder uses the catalogue cables", "[network]")
{
    CHECK(cable_spec(CableType::UG1).resistance_ohm_per_km == 0.287);
    CHECK(cable_spec(CableType::UG1).inductance_mh_per_km == 0.5316);
    CHECK(cable_spec(CableType::UG3).resistance_ohm_per_km == 1.152);
    CHECK(cable_spec(CableType::UG3).inductance_mh_per_km == 1.4579);
    CHECK_THROWS_AS(cable_spec(CableType::Custom), std::invalid_argument);

    const NetworkModel net = build_cigre_lv_residential();
    int ug1 = 0, ug3 = 0;
    for (const auto& l : net.lines) {
        const CableSpec c = cable_spec(l.cable);
        CHECK(l.resistance_per_km == c.resistance_ohm_per_km);
        CHECK(l.inductance_per_km == c.inductance_mh_per_km);
        (l.cable == CableType::UG1 ? ug1 : ug3)++;
    }
    CHECK(ug1 == 9);
    CHECK(ug3 == 5);
}

TEST_CASE("benchmark feeder is a valid radial network", "[network]")
{
    const NetworkModel net = build_cigre_lv_residential();
    CHECK(net.lines.size() == net.buses.size() - 1);
    CHECK(validate(net).empty());
    CHECK(net.slack.bus == "R1");
    CHECK(net.frequency_hz == 50.0);
    CHECK(net.base_power_kva == 100.0);
    CHECK(net.base_voltage_v == 400.0);
    CHECK(net.find_bus("R17") != nullptr);
    CHECK(net.find_bus("R12") == nullptr);
}

TEST_CASE("inductive variant sets X to five times R", "[network]")
{
    const NetworkModel net = build_cigre_lv_residential();
    const NetworkModel ind = to_inductive_variant(net);

    for (std::size_t i = 0; i < ind.lines.size(); ++i) {
        const auto& l = ind.lines[i];
        CHECK(l.reactance_per_km(ind.frequency_hz) == Approx(5.0 * l.resistance_per_km).epsilon(1e-12));
        CHECK(l.resistance_per_km == net.lines[i].resistance_per_km);
        CHECK(l.length_km == net.lines[i].length_km);
        CHECK(l.from_bus == net.lines[i].from_bus);
        CHECK(l.cable == net.lines[i].cable);
    }
    const auto ug1 = std::find_if(ind.lines.begin(), ind.lines.end(), [](auto& l) { return l.cable == CableType::UG1; });
    CHECK(ug1->reactance_per_km(50.0) == Approx(1.435).epsilon(1e-12));

    // The input is untouched and nothing but reactance changed.
    CHECK(net == build_cigre_lv_residential());
    NetworkModel restored = ind;
    for (std::size_t i = 0; i < restored.lines.size(); ++i)
        restored.lines[i].inductance_per_km = net.lines[i].inductance_per_km;
    CHECK(restored == net);

    SECTION("zero resistance gives zero reactance")
    {
        NetworkModel z = net;
        z.lines[0].resistance_per_km = 0.0;
        CHECK(to_inductive_variant(z).lines[0].reactance_per_km(50.0) == 0.0);
    }
    SECTION("idempotent")
    {
        CHECK(to_inductive_variant(ind) == ind);
    }
}

TEST_CASE("validate reports each broken invariant", "[network]")
{
    const NetworkModel good = build_cigre_lv_residential();

    SECTION("cycle")
    {
        NetworkModel net = good;
        net.lines.push_back(make_line("R17", "R18", CableType::UG3, 0.03));
        CHECK(mentions(validate(net), "not radial"));
    }
    SECTION("duplicate bus id")
    {
        NetworkModel net = good;
        net.buses.push_back({"R17"});
        CHECK(mentions(validate(net), "duplicate id"));
    }
    SECTION("disconnected island")
    {
        NetworkModel net = good;
        net.buses.push_back({"X1"});
        net.buses.push_back({"X2"});
        net.lines.push_back(make_line("X1", "X2", CableType::UG1, 0.01));
        const auto issues = validate(net);
        CHECK(mentions(issues, "not connected"));
    }
    SECTION("bad element data")
    {
        NetworkModel net = good;
        net.lines[2].length_km = 0.0;
        net.lines[3].resistance_per_km = -1.0;
        net.loads[0].active_power_kw = -5.0;
        net.loads.push_back({"nowhere", 1.0, 0.0});
        net.slack.voltage_setpoint_pu = 1.6;
        const auto issues = validate(net);
        CHECK(mentions(issues, "line R3-R4: length"));
        CHECK(mentions(issues, "line R4-R5: negative resistance"));
        CHECK(mentions(issues, "negative active power"));
        CHECK(mentions(issues, "'nowhere': unknown bus"));
        CHECK(mentions(issues, "slack voltage"));
    }
    SECTION("missing slack")
    {
        NetworkModel net = good;
        net.slack.bus = "R99";
        CHECK(mentions(validate(net), "slack bus 'R99'"));
    }
}

TEST_CASE("random radial builders always validate", "[network][property]")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 40);
        NetworkModel net = random_radial(n, rng);
        INFO("trial " << trial);
        REQUIRE(validate(net).empty());
        CHECK(net.lines.size() + 1 == net.buses.size());

        // Any extra edge between existing buses closes a loop.
        const int a = static_cast<int>(rng() % n), b = (a + 1 + static_cast<int>(rng() % (n - 1))) % n;
        net.lines.push_back(make_line("B" + std::to_string(a), "B" + std::to_string(b), CableType::UG1, 0.01));
        CHECK(mentions(validate(net), "not radial"));
    }
}

TEST_CASE("line impedance in per unit", "[network]")
{
    const LineSegment ug3 = make_line("a", "b", CableType::UG3, 1.0);
    const auto z = line_impedance_pu(ug3, 100.0, 400.0);
    // Z_base = 400^2 / 100e3 = 1.6 ohm.
    CHECK(z.real() == Approx(1.152 / 1.6).epsilon(1e-14));
    CHECK(z.real() == Approx(0.72).epsilon(1e-14));
    CHECK(z.imag() == Approx(2.0 * std::numbers::pi * 50.0 * 1.4579e-3 / 1.6).epsilon(1e-14));

    LineSegment zero = ug3;
    zero.resistance_per_km = 0.0;
    zero.inductance_per_km = 0.0;
    CHECK(line_impedance_pu(zero, 100.0, 400.0) == std::complex<double>{});

    LineSegment twice = ug3;
    twice.length_km = 2.0;
    const auto z2 = line_impedance_pu(twice, 100.0, 400.0);
    CHECK(z2.real() == Approx(2.0 * z.real()).epsilon(1e-15));
    CHECK(z2.imag() == Approx(2.0 * z.imag()).epsilon(1e-15));

    CHECK_THROWS_AS(line_impedance_pu(ug3, 0.0, 400.0), std::invalid_argument);
    CHECK_THROWS_AS(line_impedance_pu(ug3, 100.0, -1.0), std::invalid_argument);
}

TEST_CASE("per-unit conversion round-trips", "[network][property]")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> r(0.0, 3.0), l(0.0, 5.0), len(1e-3, 2.0), base_s(1.0, 1e4), base_v(100.0, 2e4);
    for (int i = 0; i < 1000; ++i) {
        const LineSegment seg{"a", "b", r(rng), l(rng), len(rng), CableType::Custom};
        const double s = base_s(rng), v = base_v(rng);
        const auto back = impedance_ohm_from_pu(line_impedance_pu(seg, s, v), s, v);
        const double r_ohm = seg.resistance_per_km * seg.length_km;
        const double x_ohm = seg.reactance_per_km(50.0) * seg.length_km;
        CHECK(std::abs(back.real() - r_ohm) <= 1e-12 * std::max(r_ohm, 1e-300));
        CHECK(std::abs(back.imag() - x_ohm) <= 1e-12 * std::max(x_ohm, 1e-300));
    }
}
