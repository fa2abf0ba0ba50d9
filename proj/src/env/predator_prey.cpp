#include "macpo/env/predator_prey.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace macpo::pp {

namespace {

constexpr std::array<Cell, 4> kDelta{Cell{-1, 0}, Cell{1, 0}, Cell{0, -1}, Cell{0, 1}};

bool in_grid(const State& s, Cell c) { return c.row >= 0 && c.row < s.grid_h && c.col >= 0 && c.col < s.grid_w; }

Cell shifted(Cell c, int dir) { return {c.row + kDelta[dir].row, c.col + kDelta[dir].col}; }

bool adjacent(Cell a, Cell b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col) == 1; }

}  // namespace

bool occupied(const State& s, Cell c) {
  for (const auto& p : s.predators)
    if (p && *p == c) return true;
  for (const auto& p : s.prey)
    if (p && *p == c) return true;
  return false;
}

int live_predators(const State& s) {
  return static_cast<int>(std::count_if(s.predators.begin(), s.predators.end(), [](auto& p) { return p.has_value(); }));
}

int live_prey(const State& s) {
  return static_cast<int>(std::count_if(s.prey.begin(), s.prey.end(), [](auto& p) { return p.has_value(); }));
}

State reset(const EnvSpec& spec, Rng& rng) {
  const int cells = spec.grid_w * spec.grid_h;
  const int entities = spec.n_agents + spec.n_prey;
  if (spec.grid_w <= 0 || spec.grid_h <= 0) throw std::invalid_argument("grid dimensions must be positive");
  if (entities > cells)
    throw std::invalid_argument("cannot place " + std::to_string(entities) + " entities on " + std::to_string(cells) +
                                " cells");
  std::vector<int> order(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) order[static_cast<std::size_t>(i)] = i;
  // partial Fisher-Yates: the first `entities` slots are a uniform draw
  for (int i = 0; i < entities; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::size_t>(cells - i));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
  }
  State s;
  s.grid_w = spec.grid_w;
  s.grid_h = spec.grid_h;
  for (int i = 0; i < entities; ++i) {
    const int k = order[static_cast<std::size_t>(i)];
    const Cell c{k / spec.grid_w, k % spec.grid_w};
    if (i < spec.n_agents)
      s.predators.emplace_back(c);
    else
      s.prey.emplace_back(c);
  }
  return s;
}

std::vector<std::uint8_t> avail_actions(const State& s, int agent) {
  std::vector<std::uint8_t> out(kNumActions, 0);
  const auto& me = s.predators.at(static_cast<std::size_t>(agent));
  if (!me) {
    out[kNoop] = 1;
    return out;
  }
  for (int d = 0; d < 4; ++d) {
    const Cell t = shifted(*me, d);
    out[static_cast<std::size_t>(d)] = in_grid(s, t) && !occupied(s, t);
  }
  out[kStay] = 1;
  for (const auto& p : s.prey)
    if (p && adjacent(*me, *p)) out[kCatch] = 1;
  return out;
}

StepResult step(const EnvSpec& spec, const State& s, const JointAction& action, Rng& rng) {
  const std::size_t n = s.predators.size();
  if (s.done) throw std::logic_error("step called on a finished episode");
  if (action.size() != n) throw std::invalid_argument("joint action length does not match predator count");
  for (std::size_t a = 0; a < n; ++a) {
    const int u = action[a];
    if (u < 0 || u >= kNumActions || !avail_actions(s, static_cast<int>(a))[static_cast<std::size_t>(u)])
      throw std::invalid_argument("agent " + std::to_string(a) + " chose unavailable action " + std::to_string(u));
  }

  StepResult r;
  r.next = s;
  State& ns = r.next;

  for (std::size_t a = 0; a < n; ++a) {
    const int u = action[a];
    if (!ns.predators[a] || u > kRight) continue;
    const Cell t = shifted(*ns.predators[a], u);
    if (in_grid(ns, t) && !occupied(ns, t)) ns.predators[a] = t;
  }

  std::vector<bool> used(n, false);
  for (auto& prey : ns.prey) {
    if (!prey) continue;
    std::vector<std::size_t> catchers;
    for (std::size_t a = 0; a < n; ++a)
      if (!used[a] && ns.predators[a] && action[a] == kCatch && adjacent(*ns.predators[a], *prey))
        catchers.push_back(a);
    if (catchers.size() >= 2) {
      for (std::size_t k = 0; k < 2; ++k) {
        used[catchers[k]] = true;
        ns.predators[catchers[k]].reset();
      }
      prey.reset();
      ++r.captures;
    }
  }
  for (std::size_t a = 0; a < n; ++a)
    if (!used[a] && action[a] == kCatch) ++r.lone_attempts;

  for (auto& prey : ns.prey) {
    if (!prey) continue;
    std::array<Cell, 5> options{};
    std::size_t k = 0;
    options[k++] = *prey;
    for (int d = 0; d < 4; ++d) {
      const Cell t = shifted(*prey, d);
      if (in_grid(ns, t) && !occupied(ns, t)) options[k++] = t;
    }
    prey = options[rng.below(k)];
  }

  ns.step_index = s.step_index + 1;
  r.reward = spec.capture_reward * r.captures + spec.punishment * r.lone_attempts;
  r.terminated = live_predators(ns) == 0 || live_prey(ns) == 0 || ns.step_index >= spec.episode_limit;
  ns.done = r.terminated;
  return r;
}

int obs_dim(const EnvSpec& spec) { return 2 * spec.obs_size * spec.obs_size + 2; }

std::vector<double> observe(const EnvSpec& spec, const State& s, int agent) {
  const int k = spec.obs_size;
  const int half = k / 2;
  std::vector<double> out(static_cast<std::size_t>(obs_dim(spec)), 0.0);
  const auto& me = s.predators.at(static_cast<std::size_t>(agent));
  if (!me) return out;
  const std::size_t plane = static_cast<std::size_t>(k * k);
  for (int dr = 0; dr < k; ++dr) {
    for (int dc = 0; dc < k; ++dc) {
      const Cell c{me->row + dr - half, me->col + dc - half};
      const auto i = static_cast<std::size_t>(dr * k + dc);
      if (!in_grid(s, c)) {
        out[i] = -1.0;
        out[plane + i] = -1.0;
      }
    }
  }
  auto mark = [&](const std::optional<Cell>& e, std::size_t channel) {
    if (!e) return;
    const int dr = e->row - me->row + half;
    const int dc = e->col - me->col + half;
    if (dr >= 0 && dr < k && dc >= 0 && dc < k) out[channel * plane + static_cast<std::size_t>(dr * k + dc)] = 1.0;
  };
  for (const auto& p : s.predators) mark(p, 0);
  for (const auto& p : s.prey) mark(p, 1);
  out[2 * plane] = s.grid_h > 1 ? static_cast<double>(me->row) / (s.grid_h - 1) : 0.0;
  out[2 * plane + 1] = s.grid_w > 1 ? static_cast<double>(me->col) / (s.grid_w - 1) : 0.0;
  return out;
}

int state_dim(const EnvSpec& spec) { return 2 * spec.grid_w * spec.grid_h; }

std::vector<double> global_state(const State& s) {
  const auto plane = static_cast<std::size_t>(s.grid_w * s.grid_h);
  std::vector<double> out(2 * plane, 0.0);
  for (const auto& p : s.predators)
    if (p) out[static_cast<std::size_t>(p->row * s.grid_w + p->col)] = 1.0;
  for (const auto& p : s.prey)
    if (p) out[plane + static_cast<std::size_t>(p->row * s.grid_w + p->col)] = 1.0;
  return out;
}

std::string render(const State& s) {
  std::string grid(static_cast<std::size_t>(s.grid_h * (s.grid_w + 1)), '.');
  for (int r = 0; r < s.grid_h; ++r) grid[static_cast<std::size_t>(r * (s.grid_w + 1) + s.grid_w)] = '\n';
  auto at = [&](Cell c) -> char& { return grid[static_cast<std::size_t>(c.row * (s.grid_w + 1) + c.col)]; };
  for (std::size_t a = 0; a < s.predators.size(); ++a)
    if (s.predators[a]) at(*s.predators[a]) = static_cast<char>('0' + a % 10);
  for (const auto& p : s.prey)
    if (p) at(*p) = 'o';
  return grid;
}

}  // namespace macpo::pp
