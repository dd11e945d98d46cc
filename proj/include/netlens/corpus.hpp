#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netlens/dates.hpp"

namespace netlens::corpus {

struct Post {
    std::string id;
    std::int64_t created_utc = 0;
    std::string title;
    std::string body;  // may be empty
    std::int64_t upvotes = 0;
    std::int64_t comment_count = 0;
    std::vector<std::string> urls;
    std::vector<std::string> media_refs;
    bool removed = false;
    std::optional<std::string> author;  // stripped by clean()
};

struct Comment {
    std::string id;
    std::string parent_id;  // post id or another comment id
    std::string post_id;
    std::int64_t created_utc = 0;
    std::string body;
    std::int64_t upvotes = 0;
    bool removed = false;
    std::optional<std::string> author;
};

struct IngestError {
    enum class Kind { missing_field, bad_timestamp, duplicate_id, bad_record };
    Kind kind;
    std::size_t line = 0;
    std::string detail;
};

struct PostLoadResult {
    std::vector<Post> posts;
    std::vector<IngestError> errors;
};

struct CommentLoadResult {
    std::vector<Comment> comments;
    std::vector<IngestError> errors;
};

/// Newline-delimited JSON, one record per line. Malformed lines become
/// IngestErrors; well-formed lines map 1:1 to records, order preserved.
/// A repeated id keeps the first record and reports the later ones.
PostLoadResult load_posts(std::istream& stream);
CommentLoadResult load_comments(std::istream& stream);

/// Re-emit in the ingest format (lossless for loadable records).
std::string serialize_posts(const std::vector<Post>& posts);
std::string serialize_comments(const std::vector<Comment>& comments);

struct CleanSummary {
    std::size_t removed_posts = 0;
    std::size_t removed_comments = 0;
    std::size_t stripped_authors = 0;
    std::vector<std::string> negative_upvote_ids;  // retained, just flagged
};

inline const std::set<std::string>& default_removal_sentinels() {
    static const std::set<std::string> s{"[removed]", "[deleted]"};
    return s;
}

/// Strips author fields and drops records whose title/body matches a removal
/// sentinel. Negative upvotes are kept as-is and flagged. Idempotent.
CleanSummary clean(std::vector<Post>& posts, std::vector<Comment>& comments,
                   const std::set<std::string>& sentinels = default_removal_sentinels());

struct CommentNode {
    Comment comment;
    std::vector<CommentNode> children;  // created_utc ascending, ties by id
};

struct Thread {
    Post root;
    std::vector<CommentNode> children;
    std::vector<Comment> orphan_comments;  // parent chain unresolved
};

struct ThreadForest {
    std::vector<Thread> threads;                  // one per post, post order preserved
    std::vector<Comment> unattached;              // post_id resolves to no loaded post
};

/// Attaches each comment under its parent; a comment joins the tree only if
/// its ancestor chain reaches the post, so cycles are impossible.
ThreadForest build_threads(const std::vector<Post>& posts, const std::vector<Comment>& comments);

std::size_t thread_size(const Thread& t);  // non-orphan comments in the tree

struct ActivityStats {
    Date week_start;  // Monday
    std::size_t posts = 0;
    std::int64_t upvotes = 0;
    std::int64_t comments = 0;
};

/// One row per ISO week covering all posts, gaps zero-filled. Upvote and
/// comment sums come from post metadata.
std::vector<ActivityStats> weekly_activity(const std::vector<Post>& posts);

std::string weekly_activity_csv(const std::vector<ActivityStats>& stats);

}  // namespace netlens::corpus
