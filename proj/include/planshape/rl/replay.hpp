#pragma once

#include <cstdint>
#include <vector>

#include "planshape/worlds/world.hpp"

namespace planshape::rl {

struct Transition {
    worlds::AgentState s;
    worlds::AgentState s2;
    std::uint64_t s_key = 0;
    std::uint64_t s2_key = 0;
    int action = 0;
    double reward = 0.0;         // extrinsic, kept pristine
    double shaped_reward = 0.0;  // reward + F
    bool done = false;
    worlds::Termination reason = worlds::Termination::none;
    std::uint32_t episode = 0;
    std::uint32_t step_index = 0;  // within the episode
};

// Ring buffer with strict FIFO eviction. Logical index 0 is the oldest
// stored transition.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        data_.reserve(capacity < 4096 ? capacity : 4096);
    }

    void push(const Transition& t) {
        if (data_.size() < capacity_) {
            data_.push_back(t);
        } else {
            data_[head_] = t;
            head_ = (head_ + 1) % capacity_;
        }
    }

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }

    const Transition& at(std::size_t i) const { return data_[(head_ + i) % data_.size()]; }
    Transition& at(std::size_t i) { return data_[(head_ + i) % data_.size()]; }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> data_;
};

}  // namespace planshape::rl
