#include "emot/seeds.hpp"

namespace emot {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = splitmix64(master ^ fnv1a64(tag));
  for (const std::uint64_t i : indices) h = splitmix64(h ^ (i + 0x9e3779b97f4a7c15ULL));
  return h;
}

}  // namespace emot
