//! Split a Java file into method snippets.
//!
//! cargo run --example extract_methods -- [File.java]

use qeck::code::extract_methods;

const SAMPLE: &str = r#"package demo;

public class Screens {
    /** Grabs the current window. */
    public Bitmap capture(Activity activity) {
        View root = activity.getWindow().getDecorView().getRootView();
        root.setDrawingCacheEnabled(true);
        return Bitmap.createBitmap(root.getDrawingCache());
    }

    // methods of anonymous classes become snippets of their own
    private final Runnable task = new Runnable() {
        @Override
        public void run() { capture(null); }
    };
}
"#;

fn main() -> qeck::Result<()> {
    let (name, source) = match std::env::args().nth(1) {
        Some(path) => (path.clone(), std::fs::read_to_string(&path)?),
        None => ("Screens.java".to_string(), SAMPLE.to_string()),
    };
    for s in extract_methods(&source, &name, "demo")? {
        println!("{}", s.snippet_id);
        println!("  signature: {}", s.signature.split_whitespace().collect::<Vec<_>>().join(" "));
        if let Some(c) = &s.leading_comment {
            println!("  comment:   {}", c.replace('\n', " "));
        }
        println!("  body:      {} bytes", s.body_text.len());
    }
    Ok(())
}
