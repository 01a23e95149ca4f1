#include "dcbia/dcb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace dcbia {

const char* to_string(ContextNorm n)
{
    return n == ContextNorm::squared ? "squared" : "unit";
}

ContextNorm context_norm_from_string(const std::string& s)
{
    if (s == "squared")
        return ContextNorm::squared;
    if (s == "unit")
        return ContextNorm::unit;
    throw std::invalid_argument("unknown context_norm '" + s + "' (expected squared or unit)");
}

// --- ReplayBuffer ------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity)
{
    if (capacity == 0)
        throw std::invalid_argument("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(Experience e)
{
    if (slots_.size() < capacity_) {
        slots_.push_back(std::move(e));
        ++size_;
        return;
    }
    slots_[head_] = std::move(e);
    head_ = (head_ + 1) % capacity_;
}

void ReplayBuffer::clear()
{
    slots_.clear();
    head_ = 0;
    size_ = 0;
}

const Experience& ReplayBuffer::operator[](std::size_t i) const
{
    if (i >= size_)
        throw std::out_of_range("replay buffer index out of range");
    return slots_[(head_ + i) % slots_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, Rng& rng) const
{
    if (count > size_)
        throw std::invalid_argument("replay buffer: sample larger than contents");
    // Floyd's algorithm: O(count^2) membership checks, independent of buffer size.
    std::vector<std::size_t> picked;
    picked.reserve(count);
    for (std::size_t j = size_ - count; j < size_; ++j) {
        const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
        if (std::find(picked.begin(), picked.end(), t) == picked.end())
            picked.push_back(t);
        else
            picked.push_back(j);
    }
    return picked;
}

// --- Agent -------------------------------------------------------------------

void AgentConfig::validate() const
{
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("agent: need at least input and output layers");
    if (!(epsilon_min >= 0.0 && epsilon_min <= epsilon_start && epsilon_start <= 1.0))
        throw std::invalid_argument("agent: require 0 <= epsilon_min <= epsilon_start <= 1");
    if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0))
        throw std::invalid_argument("agent: epsilon_decay must be in (0, 1]");
    if (warmup < 0)
        throw std::invalid_argument("agent: warmup must be >= 0");
    if (batch_size < 1 || static_cast<std::size_t>(batch_size) > replay_capacity)
        throw std::invalid_argument("agent: batch_size must be in [1, replay_capacity]");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("agent: learning_rate must be > 0");
    if (!(reward_scale > 0.0))
        throw std::invalid_argument("agent: reward_scale must be > 0");
}

DcbAgent::DcbAgent(AgentConfig config, Rng& init_rng)
    : buffer(config.replay_capacity), config_(std::move(config))
{
    config_.validate();
    net = nnet::init_network(config_.layer_sizes, init_rng);
    adam = nnet::init_adam(net, config_.learning_rate, config_.adam_beta1, config_.adam_beta2,
                           config_.adam_epsilon);
    epsilon = config_.epsilon_start;
    warmup_remaining = config_.warmup;
}

Context build_context(const ChannelEstimate& estimate, ContextNorm norm)
{
    const cvec& g = estimate.g_tilde;
    const double sq = g.squaredNorm();
    if (!(sq > 0.0))
        throw std::domain_error("build_context: zero channel estimate");
    const double scale = norm == ContextNorm::squared ? 1.0 / sq : 1.0 / std::sqrt(sq);
    const auto n = g.size();
    Context c;
    c.x.resize(2 * n);
    c.x.head(n) = g.real() * scale;
    c.x.tail(n) = g.imag() * scale;
    return c;
}

double compute_reward(const ChannelEstimate& estimate, const Beam& beam, double noise_power_w)
{
    const double sq = estimate.g_tilde.squaredNorm();
    if (!(sq > 0.0))
        throw std::domain_error("compute_reward: zero channel estimate");
    return beam_gain(estimate.g_tilde, beam) / (noise_power_w * sq);
}

int greedy_action(DcbAgent& agent, const Context& context)
{
    ++agent.forward_calls;
    const Eigen::VectorXd q = nnet::forward(agent.net, context.x);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < q.size(); ++i)
        if (q[i] > q[best])
            best = i;
    return static_cast<int>(best);
}

int select_action(DcbAgent& agent, const Context& context, Rng& rng)
{
    const auto actions = static_cast<std::size_t>(agent.net.output_size());
    if (agent.warmup_remaining > 0) {
        --agent.warmup_remaining;
        agent.last_action_warmup = true;
        return static_cast<int>(uniform_index(rng, actions));
    }
    agent.last_action_warmup = false;
    if (uniform_real(rng, 0.0, 1.0) < agent.epsilon)
        return static_cast<int>(uniform_index(rng, actions));
    return greedy_action(agent, context);
}

std::optional<double> record_and_train(DcbAgent& agent, Experience experience, Rng& rng)
{
    if (experience.action < 0 || experience.action >= agent.net.output_size())
        throw std::invalid_argument("record_and_train: action out of range");
    if (!std::isfinite(experience.reward) || experience.reward < 0.0)
        throw std::invalid_argument("record_and_train: reward must be finite and >= 0");
    if (experience.context.size() != agent.net.input_size())
        throw std::invalid_argument("record_and_train: context size mismatch");

    agent.buffer.push(std::move(experience));
    const bool warmup_guess = agent.last_action_warmup;
    agent.last_action_warmup = false;

    const auto batch_size = static_cast<std::size_t>(agent.config().batch_size);
    if (warmup_guess || agent.warmup_remaining > 0 || agent.buffer.size() < batch_size)
        return std::nullopt;

    const auto idx = agent.buffer.sample_indices(batch_size, rng);
    nnet::TrainBatch batch;
    batch.contexts.resize(agent.net.input_size(), static_cast<Eigen::Index>(batch_size));
    batch.actions.reserve(batch_size);
    batch.targets.reserve(batch_size);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const Experience& e = agent.buffer[idx[i]];
        batch.contexts.col(static_cast<Eigen::Index>(i)) = e.context;
        batch.actions.push_back(e.action);
        batch.targets.push_back(e.reward);
    }
    auto lg = nnet::loss_and_gradients(agent.net, batch);
    nnet::adam_step(agent.net, agent.adam, lg.gradients);
    ++agent.training_steps;
    agent.epsilon = std::max(agent.epsilon * agent.config().epsilon_decay, agent.config().epsilon_min);
    return lg.loss;
}

// --- Checkpoint ----------------------------------------------------------------

namespace {

std::string token(std::istream& in)
{
    std::string t;
    if (!(in >> t))
        throw std::runtime_error("agent checkpoint: unexpected end of input");
    return t;
}

void expect(std::istream& in, const std::string& w)
{
    if (auto t = token(in); t != w)
        throw std::runtime_error("agent checkpoint: expected '" + w + "', found '" + t + "'");
}

double read_double(std::istream& in)
{
    auto t = token(in);
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0')
        throw std::runtime_error("agent checkpoint: bad number '" + t + "'");
    return v;
}

long long read_int(std::istream& in)
{
    auto t = token(in);
    char* end = nullptr;
    long long v = std::strtoll(t.c_str(), &end, 10);
    if (end == t.c_str() || *end != '\0')
        throw std::runtime_error("agent checkpoint: bad integer '" + t + "'");
    return v;
}

} // namespace

void save_agent(std::ostream& out, const DcbAgent& agent, bool include_buffer)
{
    const auto flags = out.flags();
    out << std::hexfloat;
    out << "dcbia-agent 1\n";
    out << "epsilon " << agent.epsilon << '\n';
    out << "warmup_remaining " << agent.warmup_remaining << '\n';
    out << "training_steps " << agent.training_steps << '\n';
    nnet::write_checkpoint(out, agent.net, agent.adam);
    const std::size_t n = include_buffer ? agent.buffer.size() : 0;
    out << "buffer " << n << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = agent.buffer[i];
        out << e.action << ' ' << e.reward;
        for (Eigen::Index k = 0; k < e.context.size(); ++k)
            out << ' ' << e.context[k];
        out << '\n';
    }
    out << "end-agent\n";
    out.flags(flags);
}

void load_agent(std::istream& in, DcbAgent& agent)
{
    expect(in, "dcbia-agent");
    if (read_int(in) != 1)
        throw std::runtime_error("agent checkpoint: unsupported version");
    expect(in, "epsilon");
    const double eps = read_double(in);
    expect(in, "warmup_remaining");
    const long long warm = read_int(in);
    expect(in, "training_steps");
    const long long steps = read_int(in);

    nnet::MlpNetwork net;
    nnet::AdamState adam;
    nnet::read_checkpoint(in, net, adam);
    if (net.layer_sizes != agent.config().layer_sizes)
        throw std::runtime_error("agent checkpoint: network shape does not match agent config");

    expect(in, "buffer");
    const long long n = read_int(in);
    if (n < 0)
        throw std::runtime_error("agent checkpoint: bad buffer size");
    ReplayBuffer buffer(agent.config().replay_capacity);
    for (long long i = 0; i < n; ++i) {
        Experience e;
        e.action = static_cast<int>(read_int(in));
        e.reward = read_double(in);
        e.context.resize(net.input_size());
        for (Eigen::Index k = 0; k < e.context.size(); ++k)
            e.context[k] = read_double(in);
        buffer.push(std::move(e));
    }
    expect(in, "end-agent");

    agent.net = std::move(net);
    agent.adam = std::move(adam);
    agent.buffer = std::move(buffer);
    agent.epsilon = eps;
    agent.warmup_remaining = warm;
    agent.training_steps = steps;
    agent.last_action_warmup = false;
}

} // namespace dcbia
