#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "belllab/bellsim.hpp"

using namespace belllab;
using namespace belllab::bellsim;

namespace {

std::string log_to_csv(const std::vector<models::TrialRecord>& log) {
    std::ostringstream os;
    models::write_trial_csv(os, log);
    return os.str();
}

}  // namespace

TEST_CASE("message graph has no Alice<->Bob edge") {
    REQUIRE_FALSE(channel_allowed(Node::alice, Node::bob));
    REQUIRE_FALSE(channel_allowed(Node::bob, Node::alice));

    REQUIRE(channel_allowed(Node::source, Node::alice));
    REQUIRE(channel_allowed(Node::source, Node::bob));
    REQUIRE(channel_allowed(Node::alice, Node::charlie));
    REQUIRE(channel_allowed(Node::bob, Node::charlie));
    REQUIRE(kProtocolChannels.size() == 4);

    REQUIRE_THROWS_AS(Channel(Node::alice, Node::bob), protocol_violation);
}

TEST_CASE("channel round stamps must increase") {
    Channel ch(Node::source, Node::alice);
    ch.push(EmitMessage{0, EntangledTag{}}, 0);
    REQUIRE_THROWS_AS(ch.push(EmitMessage{0, EntangledTag{}}, 0), protocol_violation);
    ch.push(EmitMessage{1, EntangledTag{}}, 1);
    REQUIRE_THROWS_AS(ch.push(EmitMessage{1, EntangledTag{}}, 0), protocol_violation);
}

TEST_CASE("config validation") {
    ExperimentConfig cfg;
    cfg.rounds = 0;
    REQUIRE_THROWS_AS(run_protocol(cfg), invalid_config);
    cfg.rounds = 10;
    cfg.model = models::Model::lhv_table;  // no ensemble supplied
    REQUIRE_THROWS_AS(run_protocol(cfg), invalid_config);
    REQUIRE_THROWS_AS(run_protocol(ExperimentConfig{}, 0), invalid_config);
}

TEST_CASE("lhv runs are anticorrelated whenever directions match") {
    ExperimentConfig cfg;
    cfg.model = models::Model::lhv_cos;
    cfg.settings = models::SettingsQuad(25.0, 25.0, 25.0, 25.0);
    cfg.rounds = 100000;
    cfg.master_seed = 404;
    const auto log = run_protocol(cfg);
    REQUIRE(log.size() == 100000);
    for (const models::TrialRecord& r : log) REQUIRE(r.outcome_a == -r.outcome_b);
}

TEST_CASE("lhv outcomes are reproducible from the logged hidden state") {
    ExperimentConfig cfg;
    cfg.model = models::Model::lhv_cos;
    cfg.settings = models::SettingsQuad(0.0, 90.0, 45.0, 315.0);
    cfg.rounds = 20000;
    cfg.master_seed = 11;
    const auto log = run_protocol(cfg);
    for (const models::TrialRecord& r : log) {
        REQUIRE(r.hidden_phi.has_value());
        const models::HiddenState h{*r.hidden_phi};
        const spin::Direction a_dir = spin::Direction::from_degrees(r.a_deg);
        const spin::Direction b_dir = spin::Direction::from_degrees(r.b_deg);
        REQUIRE(r.outcome_a == models::lhv_cos_response(a_dir, h));
        REQUIRE(r.outcome_b == models::lhv_cos_response(b_dir, h.negated()));
    }
}

TEST_CASE("qm records carry no hidden state") {
    ExperimentConfig cfg;
    cfg.model = models::Model::qm;
    cfg.rounds = 1000;
    cfg.master_seed = 5;
    const auto log = run_protocol(cfg);
    for (const models::TrialRecord& r : log) REQUIRE_FALSE(r.hidden_phi.has_value());
}

TEST_CASE("rounds are numbered and settings drawn from fair coins") {
    ExperimentConfig cfg;
    cfg.model = models::Model::qm;
    cfg.rounds = 40000;
    cfg.master_seed = 1234;
    const auto log = run_protocol(cfg);
    long alternates_a = 0, alternates_b = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        REQUIRE(log[i].round == static_cast<long>(i));
        if (log[i].a_choice == models::Choice::alternate) ++alternates_a;
        if (log[i].b_choice == models::Choice::alternate) ++alternates_b;
    }
    // fair coins: 4-sigma band around N/2
    const double sigma = std::sqrt(40000.0) / 2.0;
    REQUIRE(std::abs(alternates_a - 20000.0) <= 4.0 * sigma);
    REQUIRE(std::abs(alternates_b - 20000.0) <= 4.0 * sigma);
}

TEST_CASE("replays and worker splits are byte-identical") {
    for (models::Model model : {models::Model::qm, models::Model::lhv_cos}) {
        ExperimentConfig cfg;
        cfg.model = model;
        cfg.rounds = 30000;
        cfg.master_seed = 987654321;
        const std::string serial = log_to_csv(run_protocol(cfg, 1));
        const std::string replay = log_to_csv(run_protocol(cfg, 1));
        REQUIRE(serial == replay);
        for (int workers : {2, 3, 5}) {
            REQUIRE(log_to_csv(run_protocol(cfg, workers)) == serial);
        }
    }
}

TEST_CASE("different seeds give different logs") {
    ExperimentConfig a, b;
    a.model = b.model = models::Model::qm;
    a.rounds = b.rounds = 5000;
    a.master_seed = 1;
    b.master_seed = 2;
    REQUIRE(log_to_csv(run_protocol(a)) != log_to_csv(run_protocol(b)));
}

TEST_CASE("lhv-table runs follow the sampled table") {
    ExperimentConfig cfg;
    cfg.model = models::Model::lhv_table;
    cfg.rounds = 5000;
    cfg.master_seed = 31;
    cfg.ensemble = models::StrategyEnsemble::single(models::StrategyTable(+1, -1, +1, -1));
    const auto log = run_protocol(cfg);
    for (const models::TrialRecord& r : log) {
        REQUIRE(r.outcome_a == (r.a_choice == models::Choice::primary ? +1 : -1));
        REQUIRE(r.outcome_b == (r.b_choice == models::Choice::primary ? +1 : -1));
    }
}
