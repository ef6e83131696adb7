// Copyright 2026 The qa-router Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qarouter/sql.hpp"
#include "sql_gen.hpp"
#include "sql_oracle.hpp"

using namespace qarouter;
using namespace qarouter::sql;
namespace fs = std::filesystem;

namespace {

const char* kExpensiveQuery =
    "SELECT Procedures.Name FROM Procedures ORDER BY Procedures.Cost Asc LIMIT 1";

const Database& hospital() {
  static const Database db = load_database(fs::path(QAROUTER_DATA_DIR) / "hospital");
  return db;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("qarouter_sql_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
  void write(const std::string& name, const std::string& content) const {
    std::ofstream(path / name, std::ios::binary) << content;
  }
};

const char* kTinySchema =
    R"({"tables":[{"name":"Procedures","columns":[{"name":"Name","type":"text"},{"name":"Cost","type":"number"}]}]})";

}  // namespace

TEST_CASE("parse_sql on the worked example") {
  const Query q = parse_sql(kExpensiveQuery);
  REQUIRE(q.projections.size() == 1);
  CHECK(q.projections[0].kind == Projection::Kind::Column);
  CHECK(q.projections[0].column == ColumnRef{"Procedures", "Name"});
  CHECK(q.from == "Procedures");
  REQUIRE(q.order_by);
  CHECK(q.order_by->column == ColumnRef{"Procedures", "Cost"});
  CHECK_FALSE(q.order_by->descending);
  CHECK(q.limit == 1u);
  CHECK_FALSE(q.where);
}

TEST_CASE("parse_sql minimal aggregate and keyword case") {
  const Query q = parse_sql("select count(*) from t");
  REQUIRE(q.projections.size() == 1);
  CHECK(q.projections[0].kind == Projection::Kind::CountStar);
  CHECK_FALSE(q.where);
  CHECK(q.from == "t");

  const Query d = parse_sql("SELECT COUNT(DISTINCT a.b) FROM a WHERE x = 'O''Neil';");
  CHECK(d.projections[0].kind == Projection::Kind::CountDistinct);
  CHECK(std::get<std::string>(std::get<Literal>(d.where->compare.rhs)) == "O'Neil");
}

TEST_CASE("parse_sql syntax errors") {
  try {
    parse_sql("SELECT FROM t");
    FAIL("expected SqlSyntaxError");
  } catch (const SqlSyntaxError& e) {
    CHECK(e.code() == ErrorCode::SyntaxError);
    CHECK(e.offset() == 7);
    CHECK(std::find(e.expected().begin(), e.expected().end(), "column name") != e.expected().end());
  }
  auto offset_of = [](const char* text) -> std::size_t {
    try {
      parse_sql(text);
    } catch (const SqlSyntaxError& e) {
      return e.offset();
    }
    return std::string::npos;
  };
  CHECK(offset_of("SELEKT x FROM t") == 0);
  CHECK(offset_of("SELECT x FROM t WHERE a = 'open") == 26);
  CHECK(offset_of("SELECT x FROM t LIMIT -1") == 22);
  CHECK(offset_of("SELECT x FROM t LIMIT 1.5") == 22);
  CHECK(offset_of("SELECT x FROM t extra") == 16);
  CHECK(offset_of("SELECT x FROM t WHERE (a = 1") == 28);
  CHECK(offset_of("SELECT x FROM t WHERE a 1") == 24);
  CHECK(offset_of("SELECT x, FROM t") == 10);
  CHECK(offset_of("SELECT COUNT(x) FROM t") == 13);
  CHECK(offset_of("SELECT x FROM t JOIN u x.a = u.b") == 23);
  CHECK(offset_of("SELECT x FROM t # y") == 16);
  CHECK(offset_of("SELECT x FROM select") == 14);
}

TEST_CASE("print_sql canonical form and round trip") {
  CHECK(print_sql(parse_sql(kExpensiveQuery)) ==
        "SELECT Procedures.Name FROM Procedures ORDER BY Procedures.Cost ASC LIMIT 1");
  CHECK(print_sql(parse_sql("select count(*) from Patients where Patients.Age<45.0")) ==
        "SELECT COUNT(*) FROM Patients WHERE Patients.Age < 45");
  const Query nested = parse_sql("SELECT a FROM t WHERE (a = 1 OR b = 2) AND c <> 'x' AND (d = 1 AND e = 2)");
  CHECK(print_sql(nested) ==
        "SELECT a FROM t WHERE (a = 1 OR b = 2) AND c != 'x' AND (d = 1 AND e = 2)");
  CHECK(parse_sql(print_sql(nested)) == nested);
  CHECK(nested.where->operands.size() == 3);

  testgen::Rng rng(5);
  for (int i = 0; i < 400; ++i) {
    const auto db = testgen::random_database(rng, 3);
    const Query q = testgen::random_query(rng, db);
    const std::string text = print_sql(q);
    const Query back = parse_sql(text);
    CHECK(back == q);
    CHECK(print_sql(back) == text);
  }
}

TEST_CASE("validate name resolution and types") {
  const Schema& schema = hospital().schema;
  CHECK_NOTHROW(validate(parse_sql(kExpensiveQuery), schema));
  CHECK_NOTHROW(validate(parse_sql("select procedures.name from PROCEDURES"), schema));

  const auto nome = [&] { validate(parse_sql("SELECT Nome FROM Procedures"), schema); };
  CHECK(code_of(nome) == ErrorCode::UnknownColumn);
  CHECK(message_of(nome).find("Nome") != std::string::npos);

  const auto mismatch = [&] { validate(parse_sql("SELECT Name FROM Procedures WHERE Cost > 'abc'"), schema); };
  CHECK(code_of(mismatch) == ErrorCode::TypeMismatch);
  CHECK(message_of(mismatch).find("Cost") != std::string::npos);
  CHECK(code_of([&] { validate(parse_sql("SELECT Name FROM Procedures WHERE Name = 3"), schema); }) ==
        ErrorCode::TypeMismatch);
  CHECK(code_of([&] { validate(parse_sql("SELECT Name FROM Procedures WHERE Name = Cost"), schema); }) ==
        ErrorCode::TypeMismatch);

  const auto table = [&] { validate(parse_sql("SELECT Name FROM Procedimentos"), schema); };
  CHECK(code_of(table) == ErrorCode::UnknownTable);
  CHECK(message_of(table).find("Procedimentos") != std::string::npos);
  CHECK(code_of([&] { validate(parse_sql("SELECT Patients.Name FROM Procedures"), schema); }) ==
        ErrorCode::UnknownTable);

  const char* join =
      "SELECT Name FROM Appointments JOIN Patients ON Appointments.Patient = Patients.SSN "
      "JOIN Physicians ON Appointments.Physician = Physicians.EmployeeID";
  const auto ambiguous = [&] { validate(parse_sql(join), schema); };
  CHECK(code_of(ambiguous) == ErrorCode::AmbiguousColumn);
  CHECK(message_of(ambiguous).find("Name") != std::string::npos);

  CHECK(code_of([&] { validate(parse_sql("SELECT Name, COUNT(*) FROM Procedures"), schema); }) ==
        ErrorCode::InvalidQuery);
  CHECK(code_of([&] {
          validate(parse_sql("SELECT Name FROM Procedures JOIN procedures ON Code = Code"), schema);
        }) == ErrorCode::InvalidQuery);
  // ON may only see tables joined so far.
  CHECK(code_of([&] {
          validate(parse_sql("SELECT Room FROM Appointments JOIN Patients ON Physicians.EmployeeID = "
                             "Patients.PCP JOIN Physicians ON Appointments.Physician = Physicians.EmployeeID"),
                   schema);
        }) == ErrorCode::UnknownTable);
}

TEST_CASE("execute on the hospital fixture") {
  const Database& db = hospital();
  const auto cheapest = run_query(kExpensiveQuery, db);
  REQUIRE(cheapest.rows.size() == 1);
  CHECK(std::get<std::string>(cheapest.rows[0][0]) == "Curativo");
  CHECK(cheapest.headers == std::vector<std::string>{"Name"});

  const auto count = run_query("SELECT COUNT(*) FROM Procedures WHERE Cost > 100", db);
  REQUIRE(count.rows.size() == 1);
  CHECK(std::get<double>(count.rows[0][0]) == 2.0);
  CHECK(format_csv(count, false) == "2\n");
  CHECK(format_csv(count, true) == "COUNT(*)\n2\n");

  CHECK(std::get<double>(run_query("SELECT COUNT(*) FROM Patients WHERE Patients.Age < 45", db).rows[0][0]) == 2.0);
  CHECK(std::get<double>(run_query("SELECT COUNT(*) FROM Appointments", db).rows[0][0]) == 4.0);
  CHECK(std::get<double>(run_query("SELECT COUNT(DISTINCT Patient) FROM Appointments", db).rows[0][0]) == 3.0);
  // Null Nurse is not counted.
  CHECK(std::get<double>(run_query("SELECT COUNT(DISTINCT Nurse) FROM Appointments", db).rows[0][0]) == 2.0);

  const auto joined = run_query(
      "SELECT Patients.Name, Appointments.Room FROM Appointments JOIN Patients ON "
      "Appointments.Patient = Patients.SSN WHERE Patients.Name = 'Ana Souza' ORDER BY "
      "Appointments.Duration DESC",
      db);
  REQUIRE(joined.rows.size() == 2);
  CHECK(format_csv(joined, true) == "Name,Room\nAna Souza,A\nAna Souza,A\n");
  const auto distinct = run_query(
      "SELECT DISTINCT Patients.Name, Room FROM Appointments JOIN Patients ON Patient = SSN "
      "WHERE Patients.Name = 'Ana Souza'",
      db);
  CHECK(distinct.rows.size() == 1);

  const auto desc = run_query("SELECT Name FROM Procedures ORDER BY Cost DESC LIMIT 1", db);
  CHECK(std::get<std::string>(desc.rows[0][0]) == "Tomografia");
  CHECK(run_query("SELECT Name FROM Procedures LIMIT 0", db).rows.empty());
  CHECK(run_query("SELECT COUNT(*) FROM Procedures LIMIT 0", db).rows.empty());
}

TEST_CASE("null semantics") {
  const Database& db = hospital();
  // Carla's address is null: neither = nor != is true for her.
  const auto either = run_query(
      "SELECT Name FROM Patients WHERE Address = 'x' OR Address != 'x'", db);
  CHECK(either.rows.size() == 2);
  const auto salary_asc = run_query("SELECT Name FROM Physicians ORDER BY Salary ASC", db);
  const auto salary_desc = run_query("SELECT Name FROM Physicians ORDER BY Salary DESC", db);
  CHECK(std::get<std::string>(salary_asc.rows.back()[0]) == "Dr. Pedro Nunes");
  CHECK(std::get<std::string>(salary_desc.rows.back()[0]) == "Dr. Pedro Nunes");
  CHECK(std::get<std::string>(salary_desc.rows.front()[0]) == "Dra. Marta Reis");
  const auto json = result_to_json(run_query("SELECT Salary, Position FROM Physicians", db));
  CHECK(json["rows"][1][0].get<double>() == 26500.5);
  CHECK(json["rows"][0][0].is_number_integer());
  CHECK(json["rows"][2][0].is_null());
}

TEST_CASE("empty tables and the row cap") {
  Database db;
  db.schema = schema_from_json(Json::parse(
      R"({"tables":[{"name":"t","columns":[{"name":"a","type":"number"}]},{"name":"u","columns":[{"name":"b","type":"number"}]}]})"));
  db.rows = {{}, {}};
  CHECK(std::get<double>(run_query("SELECT COUNT(*) FROM t", db).rows[0][0]) == 0.0);
  CHECK(run_query("SELECT a FROM t", db).rows.empty());

  for (int i = 0; i < 10; ++i) {
    db.rows[0].push_back({1.0});
    db.rows[1].push_back({1.0});
  }
  CHECK(std::get<double>(run_query("SELECT COUNT(*) FROM t JOIN u ON a = b", db).rows[0][0]) == 100.0);
  CHECK(code_of([&] { run_query("SELECT COUNT(*) FROM t JOIN u ON a = b", db, ExecuteOptions{50}); }) ==
        ErrorCode::ResourceLimit);
}

TEST_CASE("load_csv_database") {
  const Database& db = hospital();
  CHECK(db.rows[*db.schema.find_table("Procedures")].size() == 3);
  CHECK(db.rows[*db.schema.find_table("patients")].size() == 3);
  CHECK(db.rows[*db.schema.find_table("Appointments")].size() == 4);
  CHECK(is_null(db.rows[*db.schema.find_table("Patients")][2][3]));

  {
    TempDir dir;
    dir.write("schema.json", kTinySchema);
    CHECK(code_of([&] { load_database(dir.path); }) == ErrorCode::MissingTableFile);
    dir.write("Procedures.csv", "Cost,Name\n150,Raio-X\n");
    CHECK(code_of([&] { load_database(dir.path); }) == ErrorCode::HeaderMismatch);
    dir.write("Procedures.csv", "name,COST\nRaio-X,150\nCurativo,30.5\n");
    CHECK(load_database(dir.path).rows[0].size() == 2);
    dir.write("Procedures.csv", "Name,Cost\nRaio-X,150\nCurativo,\"12,5\"\n");
    const auto comma = [&] { load_database(dir.path); };
    CHECK(code_of(comma) == ErrorCode::NumericParseError);
    CHECK(message_of(comma).find("row 2") != std::string::npos);
    dir.write("Procedures.csv", "Name,Cost\nRaio-X,1e3\n");
    CHECK(code_of([&] { load_database(dir.path); }) == ErrorCode::NumericParseError);
    dir.write("Procedures.csv", "Name,Cost\nRaio-X\n");
    CHECK(code_of([&] { load_database(dir.path); }) == ErrorCode::SchemaError);
  }
  {
    TempDir dir;
    dir.write("schema.json", R"({"tables":[{"name":"T","file":"data/t.csv","columns":[{"name":"a","type":"number"}]}]})");
    fs::create_directories(dir.path / "data");
    dir.write("data/t.csv", "a\n-2.5\n\n7\n");
    const auto loaded = load_database(dir.path);
    CHECK(loaded.rows[0].size() == 2);
    CHECK(std::get<double>(loaded.rows[0][0][0]) == -2.5);
  }
  CHECK(code_of([] { schema_from_json(Json::parse(R"({"tables":[{"name":"t","columns":[]}]})")); }) ==
        ErrorCode::SchemaError);
  CHECK(code_of([] {
          schema_from_json(Json::parse(
              R"({"tables":[{"name":"t","columns":[{"name":"a"},{"name":"A"}]}]})"));
        }) == ErrorCode::SchemaError);
  CHECK(code_of([] {
          schema_from_json(Json::parse(
              R"({"tables":[{"name":"t","columns":[{"name":"a","type":"date"}]}]})"));
        }) == ErrorCode::SchemaError);
}

TEST_CASE("execute equals the brute-force evaluator on random databases") {
  testgen::Rng rng(99);
  int nonempty = 0;
  for (int i = 0; i < 200; ++i) {
    const auto db = testgen::random_database(rng, 20);
    const Query q = testgen::random_query(rng, db);
    INFO(print_sql(q));
    const auto got = execute(validate(parse_sql(print_sql(q)), db.schema), db);
    const auto want = oracle::brute_force_sql(q, db);
    CHECK(got.rows == want.rows);
    nonempty += !got.rows.empty();
    if (q.limit) CHECK(got.rows.size() <= *q.limit);
    if (q.order_by && !q.projections.empty() && q.projections[0].kind == Projection::Kind::Column &&
        q.projections[0].column == q.order_by->column) {
      for (std::size_t r = 1; r < got.rows.size(); ++r) {
        const auto& a = got.rows[r - 1][0];
        const auto& b = got.rows[r][0];
        if (is_null(b)) continue;
        CHECK_FALSE(is_null(a));
        if (!is_null(a)) CHECK((q.order_by->descending ? !(a < b) : !(b < a)));
      }
    }
  }
  CHECK(nonempty > 50);
}
