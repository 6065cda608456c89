use serde_json::Value;
use valuations_demo::{choquet, choquet_report, eval, eval_report, pushforward, pushforward_report};

const DOC: &str = "\
poset C2
elem a
elem b
cover a b

poset A2
elem a
elem b

valuation nu on C2
atom a 1/2
atom b 1/4

integrand h on C2
val a 1/3
val b 1

stepmap ab level 1 on A2
cells a b
";

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn pushforward_of_uniform() {
    let r = parse(pushforward(DOC, "lebesgue", "ab"));
    assert_eq!(r["text"], "1/2 a, 1/2 b");
    assert_eq!(r["cells"][1]["mass"], "1/2");
    assert_eq!(r["cells"][1]["to"], "1");
}

#[test]
fn choquet_staircase() {
    let r = parse(choquet(DOC, "nu", "h"));
    assert_eq!(r["closed_form"], "5/12");
    assert_eq!(r["oracle"], "5/12");
    assert_eq!(r["steps"].as_array().unwrap().len(), 2);
    assert_eq!(r["steps"][0]["mass"], "3/4");
    assert_eq!(r["steps"][1]["mass"], "1/4");
}

#[test]
fn eval_program() {
    let r = parse(eval(DOC, "main = let x = choice 1/3 (const A2.a) (const A2.b) in case var x { a -> const C2.b ; b -> fail C2 }"));
    assert_eq!(r["text"], "1/3 b");
}

#[test]
fn errors_are_reported_as_json() {
    let r = parse(choquet(DOC, "missing", "h"));
    assert!(r["error"].as_str().unwrap().contains("missing"));
    let r = parse(eval(DOC, "main = choice 0.5 (const C2.a) (const C2.b)"));
    assert!(r["error"].is_string());
}

fn textarea(html: &str, id: &str) -> String {
    let open = format!("<textarea id=\"{id}\"");
    let start = html.find(&open).expect("textarea present");
    let body = &html[start..];
    let body = &body[body.find('>').unwrap() + 1..];
    body[..body.find("</textarea>").unwrap()].to_string()
}

#[test]
fn page_defaults_evaluate() {
    let html = include_str!("../www/index.html");
    let doc = textarea(html, "doc");
    let prog = textarea(html, "prog");
    let pf = pushforward_report(&doc, "skew", "fan").unwrap();
    assert_eq!(pf["text"], "1/2 bot, 3/8 a");
    let ch = choquet_report(&doc, "nu", "h").unwrap();
    assert_eq!(ch["closed_form"], "5/12");
    assert_eq!(ch["equal"], true);
    let ev = eval_report(&doc, &prog).unwrap();
    assert!(ev["valuation"]["mass"].is_string());
    assert_eq!(ev["text"], "5/8 bot, 1/4 a");
}
