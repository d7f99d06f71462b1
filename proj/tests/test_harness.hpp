/// Minimal test harness: CHECK/CHECK_* macros record pass/fail lines,
/// harness::summary() prints totals and returns the process exit code.
#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

namespace harness {

inline int& failures() {
    static int count = 0;
    return count;
}

inline int& checks() {
    static int count = 0;
    return count;
}

inline void record(bool ok, const std::string& name, const std::string& detail = "") {
    ++checks();
    if (!ok) ++failures();
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.empty() ? "" : " ",
                detail.c_str());
    std::fflush(stdout);
}

inline std::string qoi(double value, double threshold) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "(val=%.3e, thr=%.3e)", value, threshold);
    return buf;
}

inline int summary(const char* suite) {
    std::printf("%s: %d/%d checks passed\n", suite, checks() - failures(), checks());
    return failures() == 0 ? 0 : 1;
}

// True when fn() throws E.
template <class E>
bool throws(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const E&) {
        return true;
    } catch (...) {
        return false;
    }
    return false;
}

} // namespace harness

#define CHECK(name, cond) harness::record((cond), (name))
#define CHECK_NEAR(name, value, expected, tol)                                              \
    do {                                                                                    \
        const double v_ = (value), e_ = (expected), t_ = (tol);                             \
        harness::record(std::abs(v_ - e_) <= t_, (name), harness::qoi(std::abs(v_ - e_), t_)); \
    } while (0)
#define CHECK_LE(name, value, bound)                                          \
    do {                                                                      \
        const double v_ = (value), b_ = (bound);                              \
        harness::record(v_ <= b_, (name), harness::qoi(v_, b_));              \
    } while (0)
#define CHECK_LT(name, value, bound)                                          \
    do {                                                                      \
        const double v_ = (value), b_ = (bound);                              \
        harness::record(v_ < b_, (name), harness::qoi(v_, b_));               \
    } while (0)
