#include <random>
#include <sstream>

#include "doctest.h"

#include "dealbench/catalog.hpp"

using namespace dealbench;
using namespace dealbench::catalog;

namespace {

const char* kCamryJson = R"([
  {
    "Product Name": "Toyota Camry",
    "Retail Price": "$26995",
    "Wholesale Price": "$21596",
    "Features": "203-hp mid-size sedan with 8-speed automatic.",
    "Reference": "https://www.toyota.com/camry/"
  }
])";

Product camry() {
    auto products = load_catalog_text(kCamryJson);
    REQUIRE(products.size() == 1);
    return products[0];
}

}  // namespace

TEST_CASE("load_catalog parses the reference record") {
    const Product p = camry();
    CHECK(p.name == "Toyota Camry");
    CHECK(p.retail_price.cents() == 2699500);
    CHECK(p.wholesale_price.cents() == 2159600);
    CHECK(p.features == "203-hp mid-size sedan with 8-speed automatic.");
    CHECK(p.category == Category::other);  // no Category key
}

TEST_CASE("load_catalog accepts an empty array") {
    CHECK(load_catalog_text("[]").empty());
    CHECK(load_catalog_text("   ").empty());
}

TEST_CASE("load_catalog rejects wholesale >= retail, naming the product") {
    const char* bad = R"([{"Product Name": "Widget", "Retail Price": "$26995",
        "Wholesale Price": "$30000", "Features": "f", "Reference": "r"}])";
    try {
        load_catalog_text(bad);
        FAIL("expected InvariantError");
    } catch (const InvariantError& e) {
        CHECK(e.record_index == 0);
        CHECK(e.product_name == "Widget");
        CHECK(std::string(e.what()).find("Widget") != std::string::npos);
    }
}

TEST_CASE("load_catalog reports the failing record index on missing keys") {
    const char* missing = R"([
      {"Product Name": "A", "Retail Price": "$2", "Wholesale Price": "$1",
       "Features": "f", "Reference": "r"},
      {"Product Name": "B", "Retail Price": "$2", "Wholesale Price": "$1",
       "Features": "f"}
    ])";
    try {
        load_catalog_text(missing);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.record_index == 1);
        CHECK(std::string(e.what()).find("Reference") != std::string::npos);
    }
}

TEST_CASE("load_catalog reads JSON lines and preserves order") {
    const std::string lines =
        R"({"Product Name":"A","Retail Price":"$2","Wholesale Price":"$1","Features":"f","Reference":"r"})"
        "\n"
        R"({"Product Name":"B","Retail Price":"$4","Wholesale Price":"$3","Features":"f","Reference":"r","Category":"electronics"})"
        "\n";
    const auto products = load_catalog_text(lines);
    REQUIRE(products.size() == 2);
    CHECK(products[0].name == "A");
    CHECK(products[1].name == "B");
    CHECK(products[1].category == Category::electronics);
}

TEST_CASE("serialize then load is identity") {
    const std::string lines =
        R"({"Product Name":"A","Retail Price":"$2,000.50","Wholesale Price":"$1000","Features":"f","Reference":"r","Category":"real estate"})"
        "\n"
        R"({"Product Name":"B","Retail Price":"$4","Wholesale Price":"$3","Features":"f","Reference":"r"})"
        "\n";
    const auto first = load_catalog_text(lines);
    const auto second = load_catalog_text(serialize_catalog(first));
    CHECK(first == second);
    // And a serialize fixpoint after one normalization pass.
    CHECK(serialize_catalog(first) == serialize_catalog(second));
}

// Budget schedule oracle, hand-computed from the Camry prices:
//   high      26995 * 1.2      = 32394.00
//   retail    26995            = 26995.00
//   mid       (26995+21596)/2  = 24295.50
//   wholesale 21596            = 21596.00
//   low       21596 * 0.8      = 17276.80
TEST_CASE("derive_budget matches the hand-computed schedule") {
    const Product p = camry();
    CHECK(derive_budget(p, BudgetLevel::high).str() == "32394.00");
    CHECK(derive_budget(p, BudgetLevel::retail).str() == "26995.00");
    CHECK(derive_budget(p, BudgetLevel::mid).str() == "24295.50");
    CHECK(derive_budget(p, BudgetLevel::wholesale).str() == "21596.00");
    CHECK(derive_budget(p, BudgetLevel::low).str() == "17276.80");
}

TEST_CASE("budget levels are strictly ordered and low is infeasible") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        Product p;
        p.name = "P" + std::to_string(i);
        const long long wholesale = 100 + static_cast<long long>(rng() % 100000000);
        const long long retail = wholesale + 1 + static_cast<long long>(rng() % 100000000);
        p.retail_price = Money::from_cents(retail);
        p.wholesale_price = Money::from_cents(wholesale);

        const Money low = derive_budget(p, BudgetLevel::low);
        const Money whole = derive_budget(p, BudgetLevel::wholesale);
        const Money mid = derive_budget(p, BudgetLevel::mid);
        const Money ret = derive_budget(p, BudgetLevel::retail);
        const Money high = derive_budget(p, BudgetLevel::high);
        CHECK(low < whole);
        CHECK(whole < mid);
        CHECK(mid < ret);
        CHECK(ret < high);
        // The low budget always sits below the seller's wholesale floor.
        CHECK(low < p.wholesale_price);
        CHECK(p.wholesale_price < mid);
    }
}

TEST_CASE("sample_products is seeded, uniform-without-replacement, order-preserving") {
    std::vector<Product> all;
    for (int i = 0; i < 100; ++i) {
        Product p;
        p.name = "P" + std::to_string(i);
        p.retail_price = Money::from_cents(2000 + i);
        p.wholesale_price = Money::from_cents(1000 + i);
        all.push_back(p);
    }
    const auto a = sample_products(all, 50, 42);
    const auto b = sample_products(all, 50, 42);
    const auto c = sample_products(all, 50, 43);
    CHECK(a.size() == 50);
    CHECK(a == b);
    CHECK(a != c);
    // Selection preserves catalog order, no duplicates.
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].name != a[i].name);
    std::size_t cursor = 0;
    for (const auto& p : a) {
        while (cursor < all.size() && all[cursor].name != p.name) ++cursor;
        CHECK(cursor < all.size());
        ++cursor;
    }
    CHECK(sample_products(all, 200, 1).size() == 100);
}
