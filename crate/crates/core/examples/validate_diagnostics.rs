use ospec::syntax::{parse_spec, validate};

const BROKEN: &str = r#"
Bad(Item[] items, int k){
    p(X?) :- not q(X?).
    exe B?.touch() :- p(B?).
    ret(X?) :- X?items(_).
    big(X?) :- X?.size() > k.
    return X? :- X?items(_), Y? > 2.
}
"#;

fn main() {
    let spec = parse_spec(BROKEN).unwrap();
    for d in validate(&spec) {
        println!("{d}");
    }
    match parse_spec("Bad(){ p :- q(X?. }") {
        Ok(_) => unreachable!(),
        Err(e) => println!("{e}"),
    }
}
