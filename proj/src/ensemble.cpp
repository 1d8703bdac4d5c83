#include "adjwalk/ensemble.hpp"

#include <atomic>

namespace adjwalk {

namespace {
std::atomic<int> g_threads{0};
}

void set_default_threads(int threads) { g_threads.store(threads > 0 ? threads : 0); }
int default_threads() { return g_threads.load(); }

}  // namespace adjwalk
