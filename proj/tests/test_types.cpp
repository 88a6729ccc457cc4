#include <doctest.h>

#include "p2pmc/config_json.hpp"
#include "p2pmc/types.hpp"
#include "support/fixtures.hpp"

#include <algorithm>
#include <random>

using namespace p2pmc;

TEST_CASE("validate: 32-peer community with 8/8/8/8 asset split is clean") {
    CommunityConfig cfg = p2pmc_tests::make_config(32);
    ScenarioSet s = p2pmc_tests::make_scenarios(cfg, 5, 5, 42);
    int nb = 0, nbp = 0, np = 0, nn = 0;
    for (const Peer& p : cfg.peers) {
        if (p.has_battery && p.has_pv) ++nbp;
        else if (p.has_battery) ++nb;
        else if (p.has_pv) ++np;
        else ++nn;
    }
    CHECK(nb == 8);
    CHECK(nbp == 8);
    CHECK(np == 8);
    CHECK(nn == 8);
    CHECK(validate_config(cfg, s).empty());
}

TEST_CASE("validate: inverted soc bounds are reported") {
    CommunityConfig cfg = p2pmc_tests::make_config(4, 3, 2);
    ScenarioSet s = p2pmc_tests::make_scenarios(cfg, 2, 2, 1);
    cfg.peers[0].battery->soc_min_kwh = 5;
    cfg.peers[0].battery->soc_max_kwh = 3;
    auto v = validate_config(cfg, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].code == "battery.soc_bounds");
    CHECK(v[0].message.find("soc bounds inverted") != std::string::npos);
}

TEST_CASE("validate: bidirectional activation is reported") {
    CommunityConfig cfg = p2pmc_tests::make_config(4, 3, 2);
    ScenarioSet s = p2pmc_tests::make_scenarios(cfg, 2, 2, 1);
    s.act_up[3] = 0.3;
    s.act_dn[3] = 0.2;
    auto v = validate_config(cfg, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].code == "scenario.bidirectional_activation");
    CHECK(v[0].message.find("bidirectional activation") != std::string::npos);
}

TEST_CASE("validate: violations are data, not failures, and accumulate") {
    CommunityConfig cfg = p2pmc_tests::make_config(4, 3, 2);
    ScenarioSet s = p2pmc_tests::make_scenarios(cfg, 2, 2, 1);
    cfg.peers[1].id = cfg.peers[0].id;                  // duplicate
    cfg.peers[2].battery.emplace();                     // unexpected battery spec
    cfg.price_book.eid_buy_price[1] = 0.0;              // breaks eid_buy >= da
    s.load[0] = -1;                                     // negative load
    cfg.reserve_exclude_trailing_hours = 3;             // >= hours
    auto v = validate_config(cfg, s);
    CHECK(v.size() >= 5);
    CHECK(std::is_sorted(v.begin(), v.end(), [](const Violation& a, const Violation& b) {
        return a.code != b.code ? a.code < b.code : a.message < b.message;
    }));
}

TEST_CASE("validate: permuting peers and scenarios leaves the violation set unchanged") {
    CommunityConfig cfg = p2pmc_tests::make_config(6, 4, 2);
    ScenarioSet s = p2pmc_tests::make_scenarios(cfg, 3, 2, 9);
    cfg.peers[2].battery->eta_charge = 1.5;
    cfg.peers[4].pv_peak_kw = -1;
    auto before = validate_config(cfg, s);
    REQUIRE(!before.empty());

    // permute peers together with every per-peer slice of the scenario data
    std::vector<int> perm = {5, 2, 0, 4, 1, 3};
    CommunityConfig cfg2 = cfg;
    ScenarioSet s2 = s;
    const int H = cfg.horizon.hours;
    for (int k = 0; k < 6; ++k) {
        cfg2.peers[k] = cfg.peers[perm[k]];
        for (int t = 0; t < H; ++t) {
            s2.pv[k * H + t] = s.pv[perm[k] * H + t];
            for (int l = 0; l < s.n_load; ++l)
                s2.load[(static_cast<size_t>(l) * 6 + k) * H + t] =
                    s.load[(static_cast<size_t>(l) * 6 + perm[k]) * H + t];
        }
    }
    auto after = validate_config(cfg2, s2);
    CHECK(before == after);
    CHECK(validate_config(cfg2, s2) == after); // idempotent
}

TEST_CASE("config json: defaults and round trip of the schema") {
    std::string text = R"({
      "horizon": {"hours": 3, "substeps": 2},
      "peers": [
        {"id": "a", "has_battery": true,
         "battery": {"soc_max_kwh": 10, "charge_max_kw": 10, "discharge_max_kw": 10}},
        {"id": "b", "has_pv": true, "pv_peak_kw": 3.0},
        {"id": "c"}
      ],
      "price_book": {"da_price": [4.0, 5.0, 6.0], "grid_tariff": 4.0, "fcr_price": 1.0},
      "variant": "iid-only"
    })";
    CommunityConfig cfg = config_from_json_text(text, "inline");
    CHECK(cfg.peers.size() == 3);
    CHECK(cfg.variant == MarketVariant::iid_only);
    CHECK(cfg.reserve_exclude_trailing_hours == 2);
    CHECK(cfg.price_book.eid_buy_price[1] == doctest::Approx(7.5));  // 1.5x default
    CHECK(cfg.price_book.eid_sell_price[1] == doctest::Approx(2.5)); // 0.5x default
    CHECK(cfg.price_book.ert_buy_price[2] == doctest::Approx(12.0));
    CHECK(cfg.price_book.p2p_iid_fee_fraction == doctest::Approx(0.05));
    CHECK(cfg.price_book.p2p_irt_fee_fraction == doctest::Approx(0.10));
    CHECK(cfg.price_book.activation_up_premium == doctest::Approx(1.1));
    CHECK(cfg.price_book.activation_down_discount == doctest::Approx(0.9));
    CHECK(cfg.peers[0].battery->soc_initial_kwh == 0.0); // defaults to soc_min
    CHECK(cfg.horizon.delta_tau() * cfg.horizon.substeps == 1.0);
}

TEST_CASE("config json: malformed input throws with the source name") {
    CHECK_THROWS_AS(config_from_json_text("{not json", "broken.json"), P2pmcError);
    CHECK_THROWS_AS(config_from_json_text(R"({"peers": []})", "x"), P2pmcError);
    CHECK_THROWS_AS(
        config_from_json_text(
            R"({"peers": [{"id":"a"}], "price_book": {"da_price": 1}, "variant": "bogus"})", "x"),
        P2pmcError);
}
