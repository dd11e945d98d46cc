#include "netlens/corpus.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "netlens/util.hpp"

namespace netlens::corpus {

namespace {

using nlohmann::json;

// Embedded http(s) URLs in free text.
std::vector<std::string> extract_urls(const std::string& text) {
    std::vector<std::string> urls;
    std::size_t pos = 0;
    while ((pos = text.find("http", pos)) != std::string::npos) {
        std::size_t scheme_end = pos + 4;
        if (scheme_end < text.size() && text[scheme_end] == 's') ++scheme_end;
        if (text.compare(scheme_end, 3, "://") != 0) {
            pos += 4;
            continue;
        }
        std::size_t end = scheme_end + 3;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end])) &&
               text[end] != ')' && text[end] != ']' && text[end] != '"')
            ++end;
        if (end > scheme_end + 3) urls.push_back(text.substr(pos, end - pos));
        pos = end;
    }
    return urls;
}

std::optional<std::int64_t> get_timestamp(const json& rec, const char* key) {
    const auto it = rec.find(key);
    if (it == rec.end()) return std::nullopt;
    if (it->is_number_integer()) return it->get<std::int64_t>();
    if (it->is_number_float()) return static_cast<std::int64_t>(it->get<double>());
    if (it->is_string()) {
        // Some dumps carry created_utc as a decimal string.
        const std::string s = it->get<std::string>();
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (end && *end == '\0' && !s.empty()) return static_cast<std::int64_t>(v);
    }
    return std::nullopt;
}

bool check_required(const json& rec, const char* key, std::size_t line,
                    std::vector<IngestError>& errors) {
    if (!rec.contains(key)) {
        errors.push_back({IngestError::Kind::missing_field, line, key});
        return false;
    }
    return true;
}

}  // namespace

PostLoadResult load_posts(std::istream& stream) {
    PostLoadResult result;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            result.errors.push_back({IngestError::Kind::bad_record, lineno, "not a JSON object"});
            continue;
        }
        bool ok = check_required(rec, "id", lineno, result.errors);
        ok &= check_required(rec, "created_utc", lineno, result.errors);
        ok &= check_required(rec, "title", lineno, result.errors);
        if (!ok) continue;

        auto ts = get_timestamp(rec, "created_utc");
        if (!ts || *ts < 0) {
            result.errors.push_back({IngestError::Kind::bad_timestamp, lineno, line});
            continue;
        }
        try {
            Post p;
            p.id = rec["id"].get<std::string>();
            if (p.id.empty()) {
                result.errors.push_back({IngestError::Kind::bad_record, lineno, "empty id"});
                continue;
            }
            if (seen.count(p.id)) {
                result.errors.push_back({IngestError::Kind::duplicate_id, lineno, p.id});
                continue;
            }
            p.created_utc = *ts;
            p.title = rec["title"].get<std::string>();
            p.body = rec.value("selftext", std::string{});
            p.upvotes = rec.value("score", std::int64_t{0});
            p.comment_count = rec.value("num_comments", std::int64_t{0});
            p.removed = rec.value("removed", false);
            if (rec.contains("author") && rec["author"].is_string())
                p.author = rec["author"].get<std::string>();
            if (rec.contains("url") && rec["url"].is_string() &&
                !rec["url"].get<std::string>().empty())
                p.urls.push_back(rec["url"].get<std::string>());
            for (auto& u : extract_urls(p.body)) p.urls.push_back(std::move(u));
            if (rec.contains("media_refs") && rec["media_refs"].is_array())
                for (const auto& m : rec["media_refs"])
                    if (m.is_string()) p.media_refs.push_back(m.get<std::string>());
            seen.insert(p.id);
            result.posts.push_back(std::move(p));
        } catch (const json::exception& e) {
            // Wrong field type in otherwise valid JSON stays a per-line error.
            result.errors.push_back({IngestError::Kind::bad_record, lineno, e.what()});
        }
    }
    return result;
}

CommentLoadResult load_comments(std::istream& stream) {
    CommentLoadResult result;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(stream, line)) {
        ++lineno;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            result.errors.push_back({IngestError::Kind::bad_record, lineno, "not a JSON object"});
            continue;
        }
        bool ok = check_required(rec, "id", lineno, result.errors);
        ok &= check_required(rec, "parent_id", lineno, result.errors);
        ok &= check_required(rec, "link_id", lineno, result.errors);
        ok &= check_required(rec, "created_utc", lineno, result.errors);
        ok &= check_required(rec, "body", lineno, result.errors);
        if (!ok) continue;

        auto ts = get_timestamp(rec, "created_utc");
        if (!ts || *ts < 0) {
            result.errors.push_back({IngestError::Kind::bad_timestamp, lineno, line});
            continue;
        }
        try {
            Comment c;
            c.id = rec["id"].get<std::string>();
            if (c.id.empty()) {
                result.errors.push_back({IngestError::Kind::bad_record, lineno, "empty id"});
                continue;
            }
            if (seen.count(c.id)) {
                result.errors.push_back({IngestError::Kind::duplicate_id, lineno, c.id});
                continue;
            }
            c.parent_id = rec["parent_id"].get<std::string>();
            c.post_id = rec["link_id"].get<std::string>();
            if (c.post_id.empty()) {
                result.errors.push_back({IngestError::Kind::missing_field, lineno, "link_id"});
                continue;
            }
            c.created_utc = *ts;
            c.body = rec["body"].get<std::string>();
            c.upvotes = rec.value("score", std::int64_t{0});
            c.removed = rec.value("removed", false);
            if (rec.contains("author") && rec["author"].is_string())
                c.author = rec["author"].get<std::string>();
            seen.insert(c.id);
            result.comments.push_back(std::move(c));
        } catch (const json::exception& e) {
            result.errors.push_back({IngestError::Kind::bad_record, lineno, e.what()});
        }
    }
    return result;
}

std::string serialize_posts(const std::vector<Post>& posts) {
    std::string out;
    for (const auto& p : posts) {
        json rec;
        rec["id"] = p.id;
        rec["created_utc"] = p.created_utc;
        rec["title"] = p.title;
        rec["selftext"] = p.body;
        rec["score"] = p.upvotes;
        rec["num_comments"] = p.comment_count;
        if (p.removed) rec["removed"] = true;
        if (p.author) rec["author"] = *p.author;
        if (!p.urls.empty()) rec["url"] = p.urls.front();
        if (!p.media_refs.empty()) rec["media_refs"] = p.media_refs;
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::string serialize_comments(const std::vector<Comment>& comments) {
    std::string out;
    for (const auto& c : comments) {
        json rec;
        rec["id"] = c.id;
        rec["parent_id"] = c.parent_id;
        rec["link_id"] = c.post_id;
        rec["created_utc"] = c.created_utc;
        rec["body"] = c.body;
        rec["score"] = c.upvotes;
        if (c.removed) rec["removed"] = true;
        if (c.author) rec["author"] = *c.author;
        out += rec.dump();
        out += '\n';
    }
    return out;
}

CleanSummary clean(std::vector<Post>& posts, std::vector<Comment>& comments,
                   const std::set<std::string>& sentinels) {
    CleanSummary summary;
    auto is_sentinel = [&](const std::string& s) { return sentinels.count(s) > 0; };

    std::vector<Post> kept_posts;
    kept_posts.reserve(posts.size());
    for (auto& p : posts) {
        if (p.removed || is_sentinel(p.body) || is_sentinel(p.title)) {
            ++summary.removed_posts;
            continue;
        }
        if (p.author) {
            p.author.reset();
            ++summary.stripped_authors;
        }
        if (p.upvotes < 0) summary.negative_upvote_ids.push_back(p.id);
        kept_posts.push_back(std::move(p));
    }
    posts = std::move(kept_posts);

    std::vector<Comment> kept_comments;
    kept_comments.reserve(comments.size());
    for (auto& c : comments) {
        if (c.removed || is_sentinel(c.body)) {
            ++summary.removed_comments;
            continue;
        }
        if (c.author) {
            c.author.reset();
            ++summary.stripped_authors;
        }
        if (c.upvotes < 0) summary.negative_upvote_ids.push_back(c.id);
        kept_comments.push_back(std::move(c));
    }
    comments = std::move(kept_comments);
    return summary;
}

namespace {

bool comment_before(const Comment& a, const Comment& b) {
    if (a.created_utc != b.created_utc) return a.created_utc < b.created_utc;
    return a.id < b.id;
}

void attach_children(CommentNode& node,
                     const std::unordered_map<std::string, std::vector<const Comment*>>& by_parent) {
    auto it = by_parent.find(node.comment.id);
    if (it == by_parent.end()) return;
    for (const Comment* c : it->second) {
        node.children.push_back(CommentNode{*c, {}});
        attach_children(node.children.back(), by_parent);
    }
}

}  // namespace

ThreadForest build_threads(const std::vector<Post>& posts, const std::vector<Comment>& comments) {
    ThreadForest forest;
    std::unordered_map<std::string, std::size_t> post_index;
    forest.threads.reserve(posts.size());
    for (const auto& p : posts) {
        post_index.emplace(p.id, forest.threads.size());
        forest.threads.push_back(Thread{p, {}, {}});
    }

    // Group comments per post, then attach top-down so a node is placed only
    // when its whole ancestor chain resolves to the root.
    std::unordered_map<std::string, std::vector<const Comment*>> per_post;
    for (const auto& c : comments) per_post[c.post_id].push_back(&c);

    for (auto& [post_id, items] : per_post) {
        auto pit = post_index.find(post_id);
        if (pit == post_index.end()) {
            for (const Comment* c : items) forest.unattached.push_back(*c);
            continue;
        }
        Thread& thread = forest.threads[pit->second];

        std::vector<const Comment*> sorted = items;
        std::sort(sorted.begin(), sorted.end(),
                  [](const Comment* a, const Comment* b) { return comment_before(*a, *b); });

        std::unordered_map<std::string, std::vector<const Comment*>> by_parent;
        std::unordered_set<std::string> ids;
        for (const Comment* c : sorted) {
            by_parent[c->parent_id].push_back(c);
            ids.insert(c->id);
        }

        // Reachability from the post decides tree membership.
        std::unordered_set<std::string> reachable{post_id};
        std::vector<const Comment*> frontier;
        for (const Comment* c : sorted)
            if (c->parent_id == post_id) frontier.push_back(c);
        while (!frontier.empty()) {
            std::vector<const Comment*> next;
            for (const Comment* c : frontier) {
                reachable.insert(c->id);
                auto cit = by_parent.find(c->id);
                if (cit != by_parent.end())
                    next.insert(next.end(), cit->second.begin(), cit->second.end());
            }
            frontier = std::move(next);
        }

        for (const Comment* c : sorted) {
            if (c->parent_id == post_id) {
                thread.children.push_back(CommentNode{*c, {}});
                attach_children(thread.children.back(), by_parent);
            } else if (!reachable.count(c->id)) {
                thread.orphan_comments.push_back(*c);
            }
        }
    }
    std::sort(forest.unattached.begin(), forest.unattached.end(), comment_before);
    return forest;
}

namespace {

std::size_t subtree_size(const CommentNode& node) {
    std::size_t n = 1;
    for (const auto& child : node.children) n += subtree_size(child);
    return n;
}

}  // namespace

std::size_t thread_size(const Thread& t) {
    std::size_t n = 0;
    for (const auto& child : t.children) n += subtree_size(child);
    return n;
}

std::vector<ActivityStats> weekly_activity(const std::vector<Post>& posts) {
    if (posts.empty()) return {};
    std::map<Date, ActivityStats> weeks;
    Date lo{INT32_MAX}, hi{INT32_MIN};
    for (const auto& p : posts) {
        Date week = week_monday(date_from_epoch_seconds(p.created_utc));
        auto& row = weeks[week];
        row.week_start = week;
        row.posts += 1;
        row.upvotes += p.upvotes;
        row.comments += p.comment_count;
        lo = std::min(lo, week);
        hi = std::max(hi, week);
    }
    std::vector<ActivityStats> out;
    for (Date w = lo; w <= hi; w = add_days(w, 7)) {
        auto it = weeks.find(w);
        if (it != weeks.end()) {
            out.push_back(it->second);
        } else {
            out.push_back(ActivityStats{w, 0, 0, 0});
        }
    }
    return out;
}

std::string weekly_activity_csv(const std::vector<ActivityStats>& stats) {
    std::string out = "week_start,posts,upvotes,comments\n";
    for (const auto& row : stats) {
        out += to_iso_date(row.week_start);
        out += ',' + std::to_string(row.posts);
        out += ',' + std::to_string(row.upvotes);
        out += ',' + std::to_string(row.comments);
        out += '\n';
    }
    return out;
}

}  // namespace netlens::corpus
