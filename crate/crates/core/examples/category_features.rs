//! Word-category proportions from a two-section dictionary with prefix entries.

use std::path::Path;

use proplab::category::{category_features, CategoryLexicon};
use proplab::corpus::tokenize;

const DICTIONARY: &str = "%
1\tnegemo
2\tsocial
3\tcertain
%
hate*\t1
enem*\t1
we\t2
they\t2
people\t2
always\t3
never\t3
";

fn main() -> proplab::Result<()> {
    let lex = CategoryLexicon::parse(Path::new("inline.dic"), DICTIONARY)?;
    println!(
        "{} categories, {} exact entries, {} prefix entries",
        lex.len(),
        lex.exact_entries(),
        lex.prefix_entries()
    );
    let tokens = tokenize("they always hated us and we never forget our enemies");
    let features = category_features(&tokens, &lex);
    for (name, share) in lex.categories().iter().zip(&features) {
        println!("{name:<8} {share:.3}");
    }
    Ok(())
}
