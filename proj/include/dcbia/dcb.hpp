#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dcbia/beamforming.hpp"
#include "dcbia/channel.hpp"
#include "dcbia/nnet.hpp"
#include "dcbia/rng.hpp"

namespace dcbia {

/// Scaling applied to the stacked [Re; Im] estimate. `squared` divides by ||g~||^2,
/// `unit` by ||g~||.
enum class ContextNorm { squared, unit };

const char* to_string(ContextNorm n);
ContextNorm context_norm_from_string(const std::string& s);

struct Context {
    Eigen::VectorXd x;
};

struct Experience {
    Eigen::VectorXd context;
    int action = 0;
    double reward = 0.0;
};

/// Bounded FIFO of experiences; the oldest entry is evicted first.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 50'000);

    void push(Experience e);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return size_ == 0; }
    void clear();

    /// i = 0 is the oldest entry.
    const Experience& operator[](std::size_t i) const;

    /// `count` distinct indices drawn uniformly without replacement.
    std::vector<std::size_t> sample_indices(std::size_t count, Rng& rng) const;

private:
    std::vector<Experience> slots_;
    std::size_t capacity_;
    std::size_t head_ = 0; // index of the oldest entry
    std::size_t size_ = 0;
};

struct AgentConfig {
    std::vector<int> layer_sizes{32, 50, 50, 50, 16, 16};
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double epsilon_start = 1.0;
    double epsilon_decay = 0.99995;
    double epsilon_min = 0.01;
    long long warmup = 10'000;
    int batch_size = 64;
    std::size_t replay_capacity = 50'000;
    ContextNorm context_norm = ContextNorm::squared;
    double reward_scale = 1.0;

    void validate() const;
    bool operator==(const AgentConfig&) const = default;
};

/// epsilon-greedy contextual bandit with an MLP reward model and experience replay.
/// Single writer: callers serialize select_action / record_and_train per agent.
class DcbAgent {
public:
    DcbAgent(AgentConfig config, Rng& init_rng);

    const AgentConfig& config() const { return config_; }

    nnet::MlpNetwork net;
    nnet::AdamState adam;
    ReplayBuffer buffer;
    double epsilon = 1.0;
    long long warmup_remaining = 0;
    long long training_steps = 0;
    long long forward_calls = 0;
    /// Set by select_action when the action was a warmup guess.
    bool last_action_warmup = false;

private:
    AgentConfig config_;
};

/// Stacks real and imaginary parts of the estimate and scales per `norm`.
/// Throws std::domain_error for a zero estimate.
Context build_context(const ChannelEstimate& estimate, ContextNorm norm = ContextNorm::squared);

/// |g~^H f|^2 / (sigma^2 ||g~||^2). Throws std::domain_error for a zero estimate.
double compute_reward(const ChannelEstimate& estimate, const Beam& beam, double noise_power_w);

int select_action(DcbAgent& agent, const Context& context, Rng& rng);

/// Stores the experience and, once warmup is over and the buffer holds a batch, runs one
/// replay training step and decays epsilon. Returns the batch loss if training ran.
std::optional<double> record_and_train(DcbAgent& agent, Experience experience, Rng& rng);

/// Greedy action, lowest index wins ties.
int greedy_action(DcbAgent& agent, const Context& context);

void save_agent(std::ostream& out, const DcbAgent& agent, bool include_buffer = true);
/// Restores state into `agent`, whose config must match the checkpoint's network shape.
void load_agent(std::istream& in, DcbAgent& agent);

} // namespace dcbia
