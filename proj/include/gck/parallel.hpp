#pragma once

#include <chrono>
#include <optional>
#include <string>

namespace gck {

// Sets the OpenMP worker count for subsequent kernels; 0 keeps the runtime default.
void set_workers(int workers);
int max_workers();

// Optional wall-clock limit polled from inside long-running kernels.
class Deadline {
public:
    using Clock = std::chrono::steady_clock;

    Deadline() = default;
    static Deadline after(std::chrono::duration<double> budget) {
        Deadline d;
        d.at_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(budget);
        return d;
    }

    bool armed() const { return at_.has_value(); }
    bool expired() const { return at_ && Clock::now() >= *at_; }
    // Throws TimeoutError naming `what` once expired.
    void check(const std::string& what) const;

private:
    std::optional<Clock::time_point> at_;
};

}  // namespace gck
