//! `exe[k]` stages: every constructor runs first, then calls stage by stage.

use std::cell::RefCell;
use std::rc::Rc;

use ospec::binding::{ClassRegistry, HostValue, ParamValue};
use ospec::evaluate;
use ospec::syntax::parse_spec;

const SPEC: &str = r#"
Shelf(Item[] items){
    new Box(I?) :- I?items(_), I?.weight() > 1.
    exe[2] B?.seal() :- B?Box(I?).
    exe[1] B?.fill(I?) :- B?Box(I?).
    exe[0] I?.label(N?) :- I?items(N?).
    return I? :- I?items(0).
}
"#;

fn main() {
    let log = Rc::new(RefCell::new(Vec::<String>::new()));
    let mut r = ClassRegistry::<String>::new();
    let l = log.clone();
    r.constructor("Box", move |args| {
        let id = format!("box({})", render(args));
        l.borrow_mut().push(format!("new {id}"));
        Ok(id)
    });
    for (class, method) in [("Box", "seal"), ("Box", "fill"), ("Item", "label")] {
        let l = log.clone();
        r.method(class, method, move |this, args| {
            l.borrow_mut()
                .push(format!("{this}.{method}({})", render(args)));
            Ok(None)
        });
    }
    r.accessor("Item", "weight", |name| Ok(name.len() as i64 - 3));

    let spec = parse_spec(SPEC).unwrap();
    let items = ParamValue::Objects(vec!["pen".into(), "lamp".into(), "kettle".into()]);
    let sols = evaluate(&spec, &[items], 0, &r).unwrap();
    print!("{}", sols[0].plan);
    println!("--");
    for line in log.borrow().iter() {
        println!("{line}");
    }
}

fn render(args: &[HostValue<String>]) -> String {
    args.iter()
        .map(|a| match a {
            HostValue::Int(n) => n.to_string(),
            HostValue::Symbol(s) => s.clone(),
            HostValue::Object(o) => o.clone(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}
