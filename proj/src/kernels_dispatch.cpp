#include "flowcast/kernels.hpp"

#include <cstdlib>
#include <string>

#include "flowcast/errors.hpp"

namespace flowcast::kernels {

#if defined(FLOWCAST_HAVE_AVX2)
const Ops* avx2_table();  // defined in kernels_avx2.cpp
#endif

namespace {

bool cpu_has_avx2_fma() {
#if defined(FLOWCAST_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* pick() {
    const Ops* avx = nullptr;
#if defined(FLOWCAST_HAVE_AVX2)
    if (cpu_has_avx2_fma()) avx = avx2_table();
#endif
    if (const char* env = std::getenv("FLOWCAST_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return &scalar();
        if (want == "avx2") {
            if (!avx) throw ConfigError("FLOWCAST_KERNELS=avx2 but AVX2+FMA is unavailable");
            return avx;
        }
        throw ConfigError("unknown FLOWCAST_KERNELS value '" + want + "' (use scalar or avx2)");
    }
    return avx ? avx : &scalar();
}

}  // namespace

const Ops* avx2() {
#if defined(FLOWCAST_HAVE_AVX2)
    return cpu_has_avx2_fma() ? avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const Ops& active() {
    static const Ops* chosen = pick();
    return *chosen;
}

std::string active_name() { return active().name; }

}  // namespace flowcast::kernels
