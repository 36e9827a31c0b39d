#pragma once

// Independent reference implementations used to check the library.

#include "raptor/bgp.hpp"
#include "raptor/churn.hpp"
#include "raptor/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// Rank from counts: 1 + strictly smaller + half the other ties.
inline std::vector<double> count_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0;
    double equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = count_ranks(x);
  const auto ry = count_ranks(y);
  const double n = static_cast<double>(x.size());
  long double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += rx[i];
    sy += ry[i];
    sxy += static_cast<long double>(rx[i]) * ry[i];
    sxx += static_cast<long double>(rx[i]) * rx[i];
    syy += static_cast<long double>(ry[i]) * ry[i];
  }
  const long double cov = sxy - sx * sy / n;
  const long double vx = sxx - sx * sx / n;
  const long double vy = syy - sy * sy / n;
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

// P(X <= k) for X ~ Bin(n, p), summed in log space.
inline double binom_cdf(std::uint64_t k, std::uint64_t n, double p) {
  if (p <= 0) return 1.0;
  if (p >= 1) return k >= n ? 1.0 : 0.0;
  long double total = 0;
  for (std::uint64_t i = 0; i <= k && i <= n; ++i) {
    const double lg = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                      static_cast<double>(i) * std::log(p) + static_cast<double>(n - i) * std::log1p(-p);
    total += std::exp(static_cast<long double>(lg));
  }
  return static_cast<double>(total);
}

// Exact interval by bisection on the binomial tails.
inline std::pair<double, double> clopper_pearson(std::uint64_t k, std::uint64_t n, double conf) {
  const double a = (1 - conf) / 2;
  double lower = 0.0;
  if (k > 0) {
    double lo = 0, hi = 1;
    for (int i = 0; i < 200; ++i) {
      const double mid = (lo + hi) / 2;
      // P(X >= k) grows with p.
      if (1.0 - binom_cdf(k - 1, n, mid) < a) lo = mid; else hi = mid;
    }
    lower = (lo + hi) / 2;
  }
  double upper = 1.0;
  if (k < n) {
    double lo = 0, hi = 1;
    for (int i = 0; i < 200; ++i) {
      const double mid = (lo + hi) / 2;
      if (binom_cdf(k, n, mid) > a) lo = mid; else hi = mid;
    }
    upper = (lo + hi) / 2;
  }
  return {lower, upper};
}

// Second-by-second replay: which AS sits on both the src->guard and
// dst->exit routes, and for how many seconds.
inline std::vector<raptor::churn::CircuitCompromiseRecord> brute_force_compromise(
    std::vector<raptor::bgp::BgpUpdate> stream, const std::vector<raptor::RelayDescriptor>& relays,
    const std::map<std::string, raptor::Asn>& local_as, raptor::Timestamp t0,
    raptor::Timestamp horizon, raptor::Timestamp min_overlap, bool distinct_as) {
  using namespace raptor;
  std::stable_sort(stream.begin(), stream.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  std::set<Ipv4Address> guards;
  std::set<Ipv4Address> exits;
  for (const auto& r : relays) {
    if (r.is_guard) guards.insert(r.address);
    if (r.is_exit) exits.insert(r.address);
  }
  std::set<std::string> sessions;
  for (const auto& u : stream) sessions.insert(u.session);
  std::map<std::string, std::map<IpPrefix, AsPath>> table;
  std::map<std::tuple<std::string, std::string, Ipv4Address, Ipv4Address, Asn>, Timestamp> seconds;
  auto route = [&](const std::string& s, Ipv4Address a) -> const AsPath* {
    const AsPath* best = nullptr;
    int len = -1;
    for (const auto& [p, path] : table[s]) {
      if (p.covers(a) && p.length() > len) {
        len = p.length();
        best = &path;
      }
    }
    return best;
  };
  std::size_t next = 0;
  for (Timestamp t = t0; t < horizon; ++t) {
    while (next < stream.size() && stream[next].timestamp <= t) {
      const auto& u = stream[next++];
      if (u.kind == bgp::UpdateKind::kAnnounce) {
        table[u.session][u.prefix] = u.path;
      } else {
        table[u.session].erase(u.prefix);
      }
    }
    for (const auto& src : sessions) {
      for (const auto& dst : sessions) {
        if (src == dst) continue;
        if (distinct_as && local_as.count(src) && local_as.count(dst) && local_as.at(src) == local_as.at(dst)) {
          continue;
        }
        for (auto g : guards) {
          const AsPath* pg = route(src, g);
          if (!pg) continue;
          for (auto e : exits) {
            if (e == g) continue;
            const AsPath* pe = route(dst, e);
            if (!pe) continue;
            for (Asn x : pg->ases()) {
              if (pe->contains(x)) ++seconds[{src, dst, g, e, x}];
            }
          }
        }
      }
    }
  }
  std::vector<churn::CircuitCompromiseRecord> out;
  for (const auto& [key, n] : seconds) {
    if (n < std::max<Timestamp>(min_overlap, 1)) continue;
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key), std::get<4>(key), n});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle

namespace fixture {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("raptor-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline raptor::Ipv4Address ip(const char* text) { return *raptor::Ipv4Address::parse(text); }
inline raptor::IpPrefix pfx(const char* text) { return *raptor::IpPrefix::parse(text); }

inline raptor::bgp::BgpUpdate announce(raptor::Timestamp t, const std::string& s, const char* prefix,
                                       std::vector<raptor::Asn> path) {
  return {t, s, raptor::bgp::UpdateKind::kAnnounce, pfx(prefix), raptor::AsPath(std::move(path))};
}

inline raptor::bgp::BgpUpdate withdraw(raptor::Timestamp t, const std::string& s, const char* prefix) {
  return {t, s, raptor::bgp::UpdateKind::kWithdraw, pfx(prefix), {}};
}

}  // namespace fixture
