#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgtd/corpus.hpp"
#include "mgtd/rng.hpp"

// Seeded French toy corpus: didactic, list-structured "machine" answers vs
// short, noisy, colloquial "human" ones on the same topics.
namespace synthetic {

std::string question(mgtd::SplitMix64& rng, std::size_t topic);
std::string machine_text(mgtd::SplitMix64& rng, std::size_t topic);
std::string human_text(mgtd::SplitMix64& rng, std::size_t topic);
// Human-written but imitating the didactic register.
std::string adversarial_text(mgtd::SplitMix64& rng, std::size_t topic);
// Newspaper-like human prose.
std::string news_text(mgtd::SplitMix64& rng, std::size_t topic);

std::size_t topic_count();

// n_machine machine units then n_human human units, Full kind.
std::vector<mgtd::ExampleUnit> units(std::size_t n_machine, std::size_t n_human, std::uint64_t seed);

// One question, one human and one machine answer per record; ids "syn-<i>".
// translation_quality drawn uniformly in 1..5.
std::vector<mgtd::Record> records(std::size_t n, std::uint64_t seed);

// Single-class out-of-domain collections tagged ftb, adversarial, bing.
std::vector<mgtd::Record> out_of_domain(std::size_t per_tag, std::uint64_t seed);

}  // namespace synthetic
