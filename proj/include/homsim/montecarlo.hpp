#pragma once

#include <cstdint>
#include <vector>

#include "homsim/node.hpp"
#include "homsim/timetag.hpp"

namespace homsim
{

/// Identifies one independent block of triggers. Its random stream depends
/// on nothing else, so trials can run in any order on any thread.
struct TrialKey
{
    std::uint64_t master_seed = 0;
    std::uint64_t point_index = 0;
    std::uint64_t trial_index = 0;
};

/// Simulates triggers [first_trigger, first_trigger + n_triggers). Per
/// trigger: one relative phase, Poisson click processes on both detectors
/// (interfering signal, flat background, darks), Gaussian jitter,
/// quantization to the detector resolution and per-channel dead time.
/// Tags are returned sorted by (time, channel).
std::vector<TimeTag> mc_trial(const NodeModel& node, const TrialKey& key, std::uint64_t first_trigger,
                              std::uint64_t n_triggers);

struct McOptions
{
    std::uint64_t trial_size = 50'000;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Splits `n_triggers` into trials of `trial_size`, runs them concurrently
/// and merges by trial index. The result does not depend on `threads`.
TimeTagStream simulate_stream(const NodeModel& node, std::uint64_t master_seed, std::uint64_t point_index,
                              std::uint64_t n_triggers, const McOptions& options = {});

}  // namespace homsim
