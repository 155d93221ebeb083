#pragma once

#include <cstddef>
#include <vector>

namespace mndt {

inline constexpr int kNone = -1;

/// Per-user view of a resource allocation. Sites are scenario site indices.
struct UserGrant {
    int site = kNone;
    int channel = kNone;
    double power_w = 0.0;

    bool assigned() const { return site != kNone; }
    bool operator==(const UserGrant&) const = default;
};

using Allocation = std::vector<UserGrant>;

/// One (user, site, channel, power) decision. An action is a bag of grants so
/// that malformed decisions (a user granted twice) are expressible and can be
/// rejected by the environment.
struct Grant {
    int user = kNone;
    int site = kNone;
    int channel = kNone;
    double power_w = 0.0;

    bool operator==(const Grant&) const = default;
};

struct AllocAction {
    std::vector<Grant> grants;

    bool operator==(const AllocAction&) const = default;
};

AllocAction to_action(const Allocation& allocation);

/// Dense users x sites matrix of linear link gains, row-major by user.
struct LinkGains {
    std::size_t users = 0;
    std::size_t sites = 0;
    std::vector<double> values;

    LinkGains() = default;
    LinkGains(std::size_t u, std::size_t s, double fill = 0.0) : users(u), sites(s), values(u * s, fill) {}

    double& operator()(std::size_t u, std::size_t s) { return values[u * sites + s]; }
    double operator()(std::size_t u, std::size_t s) const { return values[u * sites + s]; }
    const double* row(std::size_t u) const { return values.data() + u * sites; }

    bool operator==(const LinkGains&) const = default;
};

} // namespace mndt
