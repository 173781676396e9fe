#pragma once

// Seed derivation shared by every stochastic component.
//
// child = mix(master ^ fnv1a64(tag)), then for each index i:
// child = mix(child ^ (i + 0x9e3779b97f4a7c15)), where mix is the splitmix64
// finalizer. Derived streams never depend on thread scheduling order.

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace emot {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::initializer_list<std::uint64_t> indices = {});

}  // namespace emot
