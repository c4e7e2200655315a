#include "flowcast/ensemble.hpp"

#include <cmath>
#include <cstring>

#include "flowcast/errors.hpp"

namespace flowcast {

void Ensemble::validate() const {
    if (members.empty()) throw UsageError("ensemble must have at least one member");
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i].size() != dim())
            throw ShapeError("ensemble member " + std::to_string(i) +
                             " has wrong dimension");
        for (double v : members[i])
            if (!std::isfinite(v))
                throw Error("ensemble member " + std::to_string(i) +
                            " contains non-finite values");
    }
}

std::string state_hash(const std::vector<double>& state) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (double v : state) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffu;
            h *= 0x100000001b3ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace flowcast
