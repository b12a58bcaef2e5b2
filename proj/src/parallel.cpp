#include "covqt/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace covqt {

unsigned thread_budget() {
    unsigned budget = 0;
    if (const char* env = std::getenv("COVQT_THREADS")) budget = std::strtoul(env, nullptr, 10);
    if (budget == 0) budget = std::max(1u, std::thread::hardware_concurrency());
    return budget;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(thread_budget(), count);
    if (workers <= 1) {
        if (count > 0) fn(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (std::thread& t : pool) t.join();
}

} // namespace covqt
