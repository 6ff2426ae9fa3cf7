// protocol.hpp
// Locality-enforcing message-passing simulator for the Bell experiment.
//
// Node graph (the only channels that exist -- there is no Alice<->Bob edge):
//
//   Source --> Alice --> Charlie
//   Source --> Bob   --> Charlie
//
// In LHV modes every outcome is computed strictly from (local setting, local
// particle payload). In qm mode no local rule exists: outcomes are drawn by a
// nature oracle that sits outside both actors and alone sees both settings.
// LHV runs never consult it.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "belllab/errors.hpp"
#include "belllab/models.hpp"
#include "belllab/rng.hpp"

namespace belllab::bellsim {

using models::Choice;
using models::HiddenState;
using models::JointPMF;
using models::Model;
using models::SettingsQuad;
using models::StrategyEnsemble;
using models::StrategyTable;
using models::TrialRecord;

enum class Node { source, alice, bob, nature, charlie };

inline constexpr std::array<std::pair<Node, Node>, 4> kProtocolChannels = {{
    {Node::source, Node::alice},
    {Node::source, Node::bob},
    {Node::alice, Node::charlie},
    {Node::bob, Node::charlie},
}};

inline constexpr bool channel_allowed(Node from, Node to) {
    for (const auto& [f, t] : kProtocolChannels)
        if (f == from && t == to) return true;
    return false;
}

// locality by construction
static_assert(!channel_allowed(Node::alice, Node::bob));
static_assert(!channel_allowed(Node::bob, Node::alice));

struct EntangledTag {};  // qm payload: the particle carries no local outcome data

using EmitPayload = std::variant<EntangledTag, HiddenState, StrategyTable>;

struct EmitMessage {
    long round = 0;
    EmitPayload payload;
};

struct OutcomeReport {
    Node actor = Node::alice;
    long round = 0;
    Choice setting = Choice::primary;
    int outcome = +1;
};

using Message = std::variant<EmitMessage, OutcomeReport>;

// A directed queue between two fixed nodes; rejects disallowed edges and
// non-monotone round stamps.
class Channel {
public:
    Channel(Node from, Node to) : from_(from), to_(to) {
        if (!channel_allowed(from, to))
            throw protocol_violation("channel between these nodes does not exist");
    }

    void push(Message msg, long round) {
        if (round <= last_round_)
            throw protocol_violation("channel round stamps must be strictly increasing");
        last_round_ = round;
        queue_.push_back(std::move(msg));
    }

    Message pop() {
        if (queue_.empty()) throw protocol_violation("pop from empty channel");
        Message m = std::move(queue_.front());
        queue_.pop_front();
        return m;
    }

    Node from() const { return from_; }
    Node to() const { return to_; }

private:
    Node from_, to_;
    std::deque<Message> queue_;
    long last_round_ = -1;
};

struct ExperimentConfig {
    Model model = Model::qm;
    SettingsQuad settings{0.0, 90.0, 45.0, 315.0};
    long rounds = 1;
    std::uint64_t master_seed = 0;
    StrategyEnsemble ensemble;  // lhv-table only

    void validate() const {
        if (rounds < 1) throw invalid_config("ExperimentConfig: rounds must be >= 1");
        if (model == Model::lhv_table && ensemble.tables.empty())
            throw invalid_config("ExperimentConfig: lhv-table model requires an ensemble");
    }
};

namespace detail {

// Independent per-purpose seed streams; worker splits replay exactly because
// every draw depends only on (master seed, purpose, round).
enum Purpose : std::uint64_t {
    kAliceCoin = 1,
    kBobCoin = 2,
    kSourceEmit = 3,
    kNatureDraw = 4,
};

inline rng::Stream stream_for(const ExperimentConfig& cfg, std::uint64_t purpose, long round) {
    return rng::Stream(rng::derive_seed(cfg.master_seed, purpose, static_cast<std::uint64_t>(round)));
}

// Sole component that sees both settings. Quantum statistics cannot be
// produced by the local nodes, so the draw happens here, outside Alice and
// Bob. LHV runs never construct this object.
class NatureOracle {
public:
    explicit NatureOracle(const ExperimentConfig& cfg) : cfg_(cfg) {}

    std::pair<int, int> draw(long round, Choice alice, Choice bob) {
        const std::size_t slot = (alice == Choice::alternate ? 2u : 0u) +
                                 (bob == Choice::alternate ? 1u : 0u);
        if (!pmf_cache_[slot]) {
            pmf_cache_[slot] = models::qm_joint_pmf(cfg_.settings.alice_direction(alice),
                                                    cfg_.settings.bob_direction(bob));
        }
        rng::Stream stream = stream_for(cfg_, kNatureDraw, round);
        return models::sample_joint_outcome(*pmf_cache_[slot], stream);
    }

private:
    const ExperimentConfig& cfg_;
    std::array<std::optional<JointPMF>, 4> pmf_cache_;
};

inline int local_response(const EmitPayload& payload, const spin::Direction& setting_dir,
                          Choice setting, bool is_bob) {
    if (const HiddenState* h = std::get_if<HiddenState>(&payload)) {
        // Bob's particle carries -phi.
        return models::lhv_cos_response(setting_dir, is_bob ? h->negated() : *h);
    }
    if (const StrategyTable* t = std::get_if<StrategyTable>(&payload))
        return is_bob ? t->bob_value(setting) : t->alice_value(setting);
    throw protocol_violation("no local outcome rule exists for an entangled payload");
}

inline std::vector<TrialRecord> run_rounds(const ExperimentConfig& cfg, long first, long last) {
    Channel source_alice(Node::source, Node::alice);
    Channel source_bob(Node::source, Node::bob);
    Channel alice_charlie(Node::alice, Node::charlie);
    Channel bob_charlie(Node::bob, Node::charlie);

    std::optional<NatureOracle> nature;
    if (cfg.model == Model::qm) nature.emplace(cfg);

    std::vector<TrialRecord> log;
    log.reserve(static_cast<std::size_t>(last - first));

    for (long round = first; round < last; ++round) {
        // settings from independent fair coins per actor
        const Choice ca =
            stream_for(cfg, kAliceCoin, round).next_coin() ? Choice::alternate : Choice::primary;
        const Choice cb =
            stream_for(cfg, kBobCoin, round).next_coin() ? Choice::alternate : Choice::primary;

        // source emits one particle pair; the shared payload is the hidden state
        rng::Stream source_stream = stream_for(cfg, kSourceEmit, round);
        EmitPayload payload{EntangledTag{}};
        if (cfg.model == Model::lhv_cos) payload = models::sample_hidden(source_stream);
        else if (cfg.model == Model::lhv_table) payload = cfg.ensemble.sample(source_stream);
        source_alice.push(EmitMessage{round, payload}, round);
        source_bob.push(EmitMessage{round, payload}, round);

        const EmitMessage to_alice = std::get<EmitMessage>(source_alice.pop());
        const EmitMessage to_bob = std::get<EmitMessage>(source_bob.pop());

        int outcome_a = 0;
        int outcome_b = 0;
        if (cfg.model == Model::qm) {
            const auto [oa, ob] = nature->draw(round, ca, cb);
            outcome_a = oa;
            outcome_b = ob;
        } else {
            outcome_a =
                local_response(to_alice.payload, cfg.settings.alice_direction(ca), ca, false);
            outcome_b = local_response(to_bob.payload, cfg.settings.bob_direction(cb), cb, true);
        }

        alice_charlie.push(OutcomeReport{Node::alice, round, ca, outcome_a}, round);
        bob_charlie.push(OutcomeReport{Node::bob, round, cb, outcome_b}, round);

        // Charlie assembles the round from the two reports.
        const OutcomeReport ra = std::get<OutcomeReport>(alice_charlie.pop());
        const OutcomeReport rb = std::get<OutcomeReport>(bob_charlie.pop());

        TrialRecord rec;
        rec.round = round;
        rec.model = cfg.model;
        rec.a_choice = ra.setting;
        rec.b_choice = rb.setting;
        rec.a_deg = cfg.settings.alice_deg(ra.setting);
        rec.b_deg = cfg.settings.bob_deg(rb.setting);
        rec.outcome_a = ra.outcome;
        rec.outcome_b = rb.outcome;
        if (const HiddenState* h = std::get_if<HiddenState>(&payload)) rec.hidden_phi = h->phi;
        log.push_back(rec);
    }
    return log;
}

}  // namespace detail

// Deterministic event loop over the node graph; per-round randomness is
// derived from (master seed, purpose, round), so the output is invariant to
// how rounds are split across workers.
inline std::vector<TrialRecord> run_protocol(const ExperimentConfig& cfg, int workers = 1) {
    cfg.validate();
    if (workers < 1) throw invalid_config("run_protocol: workers must be >= 1");

    if (workers == 1) return detail::run_rounds(cfg, 0, cfg.rounds);

    const long chunk = (cfg.rounds + workers - 1) / workers;
    std::vector<std::vector<TrialRecord>> parts(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        const long first = static_cast<long>(w) * chunk;
        const long last = std::min<long>(cfg.rounds, first + chunk);
        if (first >= last) break;
        pool.emplace_back([&cfg, &parts, w, first, last] {
            parts[static_cast<std::size_t>(w)] = detail::run_rounds(cfg, first, last);
        });
    }
    for (std::thread& t : pool) t.join();

    std::vector<TrialRecord> merged;
    merged.reserve(static_cast<std::size_t>(cfg.rounds));
    for (std::vector<TrialRecord>& part : parts)
        merged.insert(merged.end(), part.begin(), part.end());
    return merged;
}

}  // namespace belllab::bellsim
