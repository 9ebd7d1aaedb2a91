#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace agsr {

// Items x raters categorical judgments stored as per-item category counts.
// Per-item missing raters are allowed; every scored item needs >= 2 ratings.
class RatingMatrix {
public:
    void add_rating(const std::string& item_id, const std::string& category);
    void add_rating(const std::string& item_id, bool value) {
        add_rating(item_id, value ? std::string("true") : std::string("false"));
    }

    // Declares a category that may never occur in the data (e.g. the binary
    // "false" pole when all raters agree on "true"). Chance agreement depends
    // on the size of the category space, not just on observed values.
    void declare_category(const std::string& category);

    std::size_t n_items() const { return items_.size(); }
    std::size_t n_categories() const { return categories_.size(); }

    struct Item {
        std::string id;
        std::map<std::string, std::size_t> counts; // category -> rater count
        std::size_t total = 0;
    };
    const std::vector<Item>& items() const { return items_; }
    const std::vector<std::string>& categories() const { return categories_; }

    // Mean over items of the fraction of raters choosing `category`.
    double mean_proportion(const std::string& category) const;

private:
    std::vector<Item> items_;
    std::map<std::string, std::size_t> item_index_;
    std::vector<std::string> categories_;
};

// Mean over items of pairwise rater agreement:
// sum_k r_ik (r_ik - 1) / (n_i (n_i - 1)). Throws InsufficientRaters when a
// scored item has fewer than two ratings.
double percent_agreement(const RatingMatrix& m);

// AC1 = (Pa - Pe) / (1 - Pe). For two categories Pe = 2 pi (1 - pi) with pi
// the mean item-level proportion of one category; for K categories
// Pe = (1 / (K - 1)) sum_k pi_k (1 - pi_k).
double gwet_ac1(const RatingMatrix& m);

} // namespace agsr
