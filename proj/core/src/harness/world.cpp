#include "paperfeed/harness/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "paperfeed/common/errors.hpp"
#include "paperfeed/common/jsonl.hpp"
#include "paperfeed/common/random.hpp"

namespace paperfeed::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParseError("world spec: '" + key + "' expects a number, got '" + value + "'");
  }
}

std::size_t to_count(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (v < 0 || v != std::floor(v)) throw ParseError("world spec: '" + key + "' expects a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::string unquote(const std::string& value) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') return value.substr(1, value.size() - 2);
  return value;
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
    throw ParseError("world spec: '" + key + "' expects a list like [0.2, 0.1]");
  }
  std::vector<double> out;
  std::stringstream items(value.substr(1, value.size() - 2));
  std::string item;
  while (std::getline(items, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

// Fixed category pool with roughly Zipf popularity.
const std::vector<std::string>& category_pool() {
  static const std::vector<std::string> pool = {
      "cs.LG", "cs.AI", "cs.CL", "cs.CV", "stat.ML", "cs.CY", "cs.SI", "econ.GN", "q-bio.NC",
      "physics.soc-ph", "quant-ph", "gr-qc", "math.ST", "cs.HC", "astro-ph.GA"};
  return pool;
}

const char* kKeywordTexts[] = {
    "Excited to share our new paper, now published in the journal with open access",
    "Our paper is out now in the proceedings: we show a surprising result, first author thread",
    "New preprint! We find that our results hold across settings. Paper thread below",
};
const char* kPlainTexts[] = {
    "Coffee first, then emails", "Great weather for a walk today", "Anyone watching the match tonight?",
    "Reading a novel on the train", "Made pasta from scratch, it went fine",
};

struct Draft {
  Timestamp at;
  std::uint64_t order;
  ingest::EventEnvelope event;
};

}  // namespace

double WorldSpec::like_probability(int rank) const {
  if (rank < 1) return 0.0;
  const auto r = static_cast<std::size_t>(rank);
  if (r <= position_bias.size()) return position_bias[r - 1];
  return position_bias_base / (1.0 + position_bias_decay * static_cast<double>(rank - 1));
}

void WorldSpec::validate() const {
  const std::pair<const char*, double> rates[] = {
      {"follow_degree_mean", follow_degree_mean}, {"paper_post_rate", paper_post_rate},
      {"non_paper_post_rate", non_paper_post_rate}, {"repost_rate", repost_rate},
      {"background_like_rate", background_like_rate}, {"bot_posts_per_day", bot_posts_per_day},
      {"sessions_per_day", sessions_per_day}, {"like_delay_max_seconds", like_delay_max_seconds},
      {"follows_latency_ms", follows_latency_ms}, {"position_bias_base", position_bias_base},
      {"position_bias_decay", position_bias_decay}};
  for (const auto& [name, v] : rates) {
    if (!(v >= 0.0)) throw ValidationError(std::string("world spec: ") + name + " must be >= 0");
  }
  const std::pair<const char*, double> fractions[] = {
      {"quote_fraction", quote_fraction}, {"delete_fraction", delete_fraction}, {"bot_fraction", bot_fraction},
      {"next_page_probability", next_page_probability}, {"follows_failure_rate", follows_failure_rate}};
  for (const auto& [name, v] : fractions) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string("world spec: ") + name + " must be in [0, 1]");
  }
  if (n_users > 0 && follow_degree_mean > static_cast<double>(n_users - 1)) {
    throw ValidationError("world spec: follow_degree_mean " + std::to_string(follow_degree_mean) +
                          " exceeds n_users - 1 = " + std::to_string(n_users - 1));
  }
  if (duration_days < 0 || warmup_days < 0) throw ValidationError("world spec: durations must be >= 0");
  if (page_size < 1 || page_size > 100) throw ValidationError("world spec: page_size must be in [1, 100]");
  for (int r = 1; r < 200; ++r) {
    const double p = like_probability(r);
    if (p < 0.0 || p > 1.0) throw ValidationError("world spec: like probability out of [0, 1] at rank " + std::to_string(r));
    if (like_probability(r + 1) > p) {
      throw ValidationError("world spec: position bias must be nonincreasing (rank " + std::to_string(r + 1) + ")");
    }
  }
}

WorldSpec WorldSpec::parse(std::string_view text) {
  WorldSpec s;
  const std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters = {
      {"seed", [&](auto& k, auto& v) { s.seed = static_cast<std::uint64_t>(to_count(k, v)); }},
      {"n_users", [&](auto& k, auto& v) { s.n_users = to_count(k, v); }},
      {"follow_degree_mean", [&](auto& k, auto& v) { s.follow_degree_mean = to_double(k, v); }},
      {"follow_degree_max", [&](auto& k, auto& v) { s.follow_degree_max = to_count(k, v); }},
      {"paper_post_rate", [&](auto& k, auto& v) { s.paper_post_rate = to_double(k, v); }},
      {"non_paper_post_rate", [&](auto& k, auto& v) { s.non_paper_post_rate = to_double(k, v); }},
      {"quote_fraction", [&](auto& k, auto& v) { s.quote_fraction = to_double(k, v); }},
      {"delete_fraction", [&](auto& k, auto& v) { s.delete_fraction = to_double(k, v); }},
      {"repost_rate", [&](auto& k, auto& v) { s.repost_rate = to_double(k, v); }},
      {"background_like_rate", [&](auto& k, auto& v) { s.background_like_rate = to_double(k, v); }},
      {"bot_fraction", [&](auto& k, auto& v) { s.bot_fraction = to_double(k, v); }},
      {"bot_posts_per_day", [&](auto& k, auto& v) { s.bot_posts_per_day = to_double(k, v); }},
      {"warmup_days", [&](auto& k, auto& v) { s.warmup_days = static_cast<int>(to_count(k, v)); }},
      {"duration_days", [&](auto& k, auto& v) { s.duration_days = static_cast<int>(to_count(k, v)); }},
      {"start", [&](auto&, auto& v) { s.start = parse_timestamp(unquote(v)); }},
      {"sessions_per_day", [&](auto& k, auto& v) { s.sessions_per_day = to_double(k, v); }},
      {"next_page_probability", [&](auto& k, auto& v) { s.next_page_probability = to_double(k, v); }},
      {"page_size", [&](auto& k, auto& v) { s.page_size = static_cast<int>(to_count(k, v)); }},
      {"like_delay_max_seconds", [&](auto& k, auto& v) { s.like_delay_max_seconds = to_double(k, v); }},
      {"position_bias", [&](auto& k, auto& v) { s.position_bias = to_list(k, v); }},
      {"position_bias_base", [&](auto& k, auto& v) { s.position_bias_base = to_double(k, v); }},
      {"position_bias_decay", [&](auto& k, auto& v) { s.position_bias_decay = to_double(k, v); }},
      {"opt_out_users", [&](auto& k, auto& v) { s.opt_out_users = to_count(k, v); }},
      {"follows_latency_ms", [&](auto& k, auto& v) { s.follows_latency_ms = to_double(k, v); }},
      {"follows_failure_rate", [&](auto& k, auto& v) { s.follows_failure_rate = to_double(k, v); }},
  };

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;  // blank or table header
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("world spec line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ParseError("world spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    it->second(key, value);
  }
  s.validate();
  return s;
}

WorldSpec WorldSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read world spec " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

nlohmann::json WorldSpec::to_json() const {
  return {{"seed", seed},
          {"n_users", n_users},
          {"follow_degree_mean", follow_degree_mean},
          {"follow_degree_max", follow_degree_max},
          {"paper_post_rate", paper_post_rate},
          {"non_paper_post_rate", non_paper_post_rate},
          {"quote_fraction", quote_fraction},
          {"delete_fraction", delete_fraction},
          {"repost_rate", repost_rate},
          {"background_like_rate", background_like_rate},
          {"bot_fraction", bot_fraction},
          {"bot_posts_per_day", bot_posts_per_day},
          {"warmup_days", warmup_days},
          {"duration_days", duration_days},
          {"start", format_timestamp(start)},
          {"sessions_per_day", sessions_per_day},
          {"next_page_probability", next_page_probability},
          {"page_size", page_size},
          {"like_delay_max_seconds", like_delay_max_seconds},
          {"position_bias", position_bias},
          {"position_bias_base", position_bias_base},
          {"position_bias_decay", position_bias_decay},
          {"opt_out_users", opt_out_users},
          {"follows_latency_ms", follows_latency_ms},
          {"follows_failure_rate", follows_failure_rate}};
}

World generate_world(const WorldSpec& spec) {
  spec.validate();
  World w;
  w.spec = spec;
  Rng rng(spec.seed);

  // Accounts; bots are picked uniformly and never use the feed.
  const auto n_bots = static_cast<std::size_t>(std::llround(spec.bot_fraction * static_cast<double>(spec.n_users)));
  std::vector<std::size_t> order(spec.n_users);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  const std::set<std::size_t> bots(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_bots));
  for (std::size_t i = 0; i < spec.n_users; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "%05zu", i);
    const bool bot = bots.contains(i);
    w.accounts.push_back({std::string("did:plc:u") + id,
                          (bot ? std::string("arxiv-bot") : std::string("user")) + id + ".example.social", bot});
    if (!bot) w.feed_users.push_back(w.accounts.back().did);
  }

  // Follow graph: Pareto(2) out-degrees scaled to the mean, uniform targets.
  const std::size_t n = spec.n_users;
  const std::size_t cap = n == 0 ? 0 : std::min(spec.follow_degree_max, n - 1);
  std::vector<Draft> drafts;
  std::uint64_t order_no = 0;
  const auto add = [&](Timestamp at, ingest::EventEnvelope e) {
    e.created_at = at;
    e.received_at = at;
    drafts.push_back({at, order_no++, std::move(e)});
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double u = 1.0 - rng.uniform();
    const double pareto = (spec.follow_degree_mean / 2.0) / std::sqrt(u);
    const auto degree = std::min<std::size_t>(cap, static_cast<std::size_t>(std::llround(pareto)));
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    // Partial Fisher-Yates for the first `degree` targets.
    for (std::size_t k = 0; k < degree; ++k) std::swap(others[k], others[k + rng.below(others.size() - k)]);
    auto& list = w.follows[w.accounts[i].did];
    for (std::size_t k = 0; k < degree; ++k) {
      list.push_back(w.accounts[others[k]].did);
      ingest::EventEnvelope e;
      e.kind = ingest::EventKind::follow;
      e.actor_id = w.accounts[i].did;
      e.subject_uri = w.accounts[others[k]].did;
      add(spec.start, std::move(e));
    }
    std::sort(list.begin(), list.end());
  }

  // Posts, one account-day at a time.
  const int days = spec.warmup_days + spec.duration_days;
  const Duration day = std::chrono::days(1);
  std::uint64_t post_no = 0;
  std::uint64_t arxiv_no = 0;
  std::vector<std::pair<Timestamp, std::string>> paper_posts;
  std::vector<std::pair<Timestamp, std::string>> all_posts;
  const auto& pool = category_pool();
  const auto random_time = [&](int d) {
    return spec.start + d * day + Duration(static_cast<std::int64_t>(rng.uniform() * 86'400.0)) * 1'000'000;
  };
  const auto new_arxiv_id = [&] {
    char id[32];
    std::snprintf(id, sizeof id, "2503.%05llu", static_cast<unsigned long long>(++arxiv_no));
    std::vector<std::string> cats;
    const std::size_t k = 1 + (rng.uniform() < 0.3 ? 1 : 0) + (rng.uniform() < 0.1 ? 1 : 0);
    while (cats.size() < k) {
      // Zipf-like: index = floor(pool * u^2).
      const double uu = rng.uniform();
      const auto& c = pool[static_cast<std::size_t>(uu * uu * static_cast<double>(pool.size()))];
      if (std::find(cats.begin(), cats.end(), c) == cats.end()) cats.push_back(c);
    }
    w.catalog.add(id, cats);
    return std::string(id);
  };
  const auto make_post = [&](const Account& a, Timestamp at, bool paper) {
    char rkey[32];
    std::snprintf(rkey, sizeof rkey, "p%07llu", static_cast<unsigned long long>(++post_no));
    ingest::PostPayload p;
    p.uri = "at://" + a.did + "/app.bsky.feed.post/" + rkey;
    p.author_id = a.did;
    p.created_at = at;
    if (a.bot) {
      const auto id = new_arxiv_id();
      p.text = "New submission " + id;
      p.links = {"https://arxiv.org/abs/" + id};
    } else if (paper) {
      const double style = rng.uniform();
      if (style < 0.5) {
        const auto id = new_arxiv_id();
        p.text = "Worth a read";
        p.links = {"https://arxiv.org/abs/" + id};
      } else if (style < 0.7) {
        p.text = "Interesting";
        p.links = {"https://doi.org/10.1000/x" + std::to_string(post_no)};
      } else {
        p.text = kKeywordTexts[rng.below(std::size(kKeywordTexts))];
      }
      if (!paper_posts.empty() && rng.bernoulli(spec.quote_fraction)) {
        p.quote_of = paper_posts[rng.below(paper_posts.size())].second;
      }
    } else {
      p.text = kPlainTexts[rng.below(std::size(kPlainTexts))];
      if (rng.uniform() < 0.3) p.links = {"https://www.youtube.com/watch?v=" + std::to_string(post_no)};
    }
    return p;
  };

  for (int d = 0; d < days; ++d) {
    struct Planned {
      Timestamp at;
      std::size_t account;
      bool paper;
    };
    std::vector<Planned> planned;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = w.accounts[i];
      const auto papers = rng.poisson(a.bot ? spec.bot_posts_per_day : spec.paper_post_rate);
      const auto plain = a.bot ? 0 : rng.poisson(spec.non_paper_post_rate);
      for (std::uint64_t k = 0; k < papers; ++k) planned.push_back({random_time(d), i, true});
      for (std::uint64_t k = 0; k < plain; ++k) planned.push_back({random_time(d), i, false});
    }
    std::stable_sort(planned.begin(), planned.end(), [](const auto& x, const auto& y) { return x.at < y.at; });
    for (const auto& pl : planned) {
      auto payload = make_post(w.accounts[pl.account], pl.at, pl.paper);
      w.is_paper[payload.uri] = pl.paper;
      if (pl.paper) paper_posts.emplace_back(pl.at, payload.uri);
      all_posts.emplace_back(pl.at, payload.uri);
      const auto uri = payload.uri;
      ingest::EventEnvelope e;
      e.kind = ingest::EventKind::post_create;
      e.actor_id = payload.author_id;
      e.record = std::move(payload);
      add(pl.at, std::move(e));
      if (pl.paper && rng.bernoulli(spec.delete_fraction)) {
        const Timestamp when = pl.at + Duration(static_cast<std::int64_t>((1.0 + 47.0 * rng.uniform()) * 3600.0)) *
                                           1'000'000;
        if (when < spec.end()) {
          ingest::EventEnvelope del;
          del.kind = ingest::EventKind::post_delete;
          del.actor_id = w.accounts[pl.account].did;
          del.subject_uri = uri;
          add(when, std::move(del));
          w.deleted.push_back(uri);
        }
      }
    }

    // Reposts of earlier paper posts and likes outside the feed.
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = w.accounts[i];
      if (a.bot) continue;
      const auto reposts = rng.poisson(spec.repost_rate);
      for (std::uint64_t k = 0; k < reposts && !paper_posts.empty(); ++k) {
        const Timestamp at = random_time(d);
        const auto& target = paper_posts[rng.below(paper_posts.size())];
        if (target.first >= at) continue;
        ingest::EventEnvelope e;
        e.kind = ingest::EventKind::repost;
        e.actor_id = a.did;
        e.subject_uri = target.second;
        add(at, std::move(e));
      }
      const auto likes = rng.poisson(spec.background_like_rate);
      for (std::uint64_t k = 0; k < likes && !all_posts.empty(); ++k) {
        const Timestamp at = random_time(d);
        const auto& target = all_posts[rng.below(all_posts.size())];
        if (target.first >= at) continue;
        ingest::EventEnvelope e;
        e.kind = ingest::EventKind::like;
        e.actor_id = a.did;
        e.subject_uri = target.second;
        add(at, std::move(e));
      }
    }
  }

  std::stable_sort(drafts.begin(), drafts.end(), [](const Draft& x, const Draft& y) {
    return x.at != y.at ? x.at < y.at : x.order < y.order;
  });
  std::uint64_t seq = 0;
  w.events.reserve(drafts.size());
  for (auto& d : drafts) {
    d.event.seq = ++seq;
    w.events.push_back(std::move(d.event));
  }
  return w;
}

nlohmann::json World::ground_truth() const {
  nlohmann::json accounts_json = nlohmann::json::array();
  for (const auto& a : accounts) accounts_json.push_back({{"did", a.did}, {"handle", a.handle}, {"bot", a.bot}});
  std::ostringstream catalog_csv;
  catalog.write_csv(catalog_csv);
  std::size_t papers = 0;
  for (const auto& [uri, paper] : is_paper) papers += paper ? 1 : 0;
  nlohmann::json bias = nlohmann::json::array();
  for (int r = 1; r <= 30; ++r) bias.push_back(spec.like_probability(r));
  return {{"spec", spec.to_json()},
          {"accounts", accounts_json},
          {"follows", follows},
          {"feed_users", feed_users},
          {"is_paper", is_paper},
          {"deleted", deleted},
          {"arxiv_catalog_csv", catalog_csv.str()},
          {"planted",
           {{"paper_posts", papers},
            {"posts", is_paper.size()},
            {"events", events.size()},
            {"like_probability_by_rank", bias}}}};
}

std::filesystem::path world_sidecar(const std::filesystem::path& events_path) {
  auto p = events_path;
  p.replace_extension(".world.json");
  return p;
}

void write_world(const World& world, const std::filesystem::path& events_path) {
  {
    std::ofstream out(events_path, std::ios::trunc);
    if (!out) throw Error("cannot write " + events_path.string());
    for (const auto& e : world.events) out << ingest::to_json_line(e) << '\n';
  }
  std::ofstream side(world_sidecar(events_path), std::ios::trunc);
  if (!side) throw Error("cannot write " + world_sidecar(events_path).string());
  side << world.ground_truth().dump(2) << '\n';
}

World read_world(const std::filesystem::path& events_path) {
  World w;
  std::ifstream side(world_sidecar(events_path));
  if (!side) throw ParseError("missing world file " + world_sidecar(events_path).string());
  nlohmann::json gt;
  try {
    gt = nlohmann::json::parse(side);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("world file: " + std::string(e.what()));
  }
  std::ostringstream spec_text;
  for (const auto& [k, v] : gt.at("spec").items()) {
    if (v.is_array()) {
      spec_text << k << " = [";
      for (std::size_t i = 0; i < v.size(); ++i) spec_text << (i ? ", " : "") << v[i].dump();
      spec_text << "]\n";
    } else {
      spec_text << k << " = " << v.dump() << '\n';
    }
  }
  w.spec = WorldSpec::parse(spec_text.str());
  for (const auto& a : gt.at("accounts")) {
    w.accounts.push_back({a.at("did").get<std::string>(), a.at("handle").get<std::string>(), a.at("bot").get<bool>()});
  }
  w.follows = gt.at("follows").get<std::map<std::string, std::vector<std::string>>>();
  w.feed_users = gt.at("feed_users").get<std::vector<std::string>>();
  w.is_paper = gt.at("is_paper").get<std::map<std::string, bool>>();
  w.deleted = gt.at("deleted").get<std::vector<std::string>>();
  std::istringstream csv(gt.at("arxiv_catalog_csv").get<std::string>());
  w.catalog = classify::ArxivCatalog::parse_csv(csv);
  for_each_jsonl(events_path, [&](const nlohmann::json& j) { w.events.push_back(ingest::event_from_json(j)); });
  return w;
}

}  // namespace paperfeed::harness
