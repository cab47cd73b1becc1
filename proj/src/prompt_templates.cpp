// Prompt template bodies. Whitespace is significant; do not reformat.

#include "cascade/prompts.hpp"

namespace cascade::prompts::detail {

extern const char* const kBaseBody = R"PROMPT(We are currently solving the following issue within our repository. Here is the issue text:
--- BEGIN ISSUE ---
{problem_statement}
--- END ISSUE ---

Below are some code segments, each from a relevant file. One or more of these files may contain bugs:
--- BEGIN FILE ---
{retrieval}
--- END FILE ---

Please first localize the bug based on the issue statement, and then generate *SEARCH/REPLACE* edits to fix the issue.

Every *SEARCH/REPLACE* edit must use this format:
1. The file path
2. The start of search block: <<<<<<< SEARCH
3. A contiguous chunk of lines to search for in the existing source code
4. The dividing line: =======
5. The lines to replace into the source code
6. The end of the replace block: >>>>>>> REPLACE

Here is an example:

```python
### mathweb/flask/app.py
<<<<<<< SEARCH
from flask import Flask
=======
import math
from flask import Flask
>>>>>>> REPLACE
```

Please note that the *SEARCH/REPLACE* edit REQUIRES PROPER INDENTATION. If you would like to add the line '        print(x)', you must fully write that out, with all those spaces before the code!
Wrap the *SEARCH/REPLACE* edit in blocks ```python...```.)PROMPT";

extern const char* const kRepoSummaryBody = R"PROMPT(I need you to provide high-level insights about the following repository: {repo_name}

Based on the repository structure and README below, generate a comprehensive overview of this repository that could help guide a language model in solving technical issues.

Repository Structure:
{repo_structure}

README Content:
{readme_content}

Please provide the following insights. For each point, provide concrete details and specific examples from the codebase - high-level doesn't mean vague, it means providing a clear architectural overview with specific names, patterns, and implementations:

1. Core Purpose and Functionality: 
    - What specific problem does this repository solve?
    - What are its primary features and capabilities?

2. Main Architectural Patterns:
    - Identify concrete architectural patterns used in this codebase
    - EXAMPLE: Plugin based architecture, layered architecture, etc

3. Module Organization:
    - Name the specific key modules and their exact responsibilities
    - EXAMPLE: I/O module, error-handling module, etc

4. Key Abstractions and Concepts:
    - List the actual fundamental abstractions used in the codebase
    - EXAMPLE: Quantity class for numerical values, Logger class for logging, etc

5. Design Patterns:
    - Identify specific recurring code patterns with examples
    - EXAMPLE: Factory methods, Decorators, etc

6. Error Handling Approaches:
    - Describe precise error handling mechanisms used in the codebase
    - EXAMPLE: Custom exception hierarchies, warnings, etc

Focus on providing actionable architectural insights that would be valuable for understanding the repository's design philosophy and core abstractions. Your response should contain specific implementation details that would help someone understand how to navigate, extend, and debug the codebase to solve issues.)PROMPT";

extern const char* const kRepoFAQBody = R"PROMPT(I need you to generate a comprehensive FAQ about the repository: {repo_name}

Based on the repository structure and README below, create a detailed set of technical FAQs that would help a developer solve issues in this codebase. These FAQs should serve as guidance for someone who is trying to resolve bugs or implement new features.

Repository Structure:
{repo_structure}

README Content:
{readme_content}

Please generate 15-20 frequently asked questions with detailed answers about:

1. Code Organization and Architecture:
   - How is the codebase structured?
   - What are the key modules and their responsibilities?
   - How do the different components interact?

2. Common Patterns and Conventions:
   - What design patterns are commonly used?
   - What are the naming conventions and code style expectations?
   - Are there specific patterns for implementing new features?

3. Typical Debugging Approaches:
   - What are common error patterns and their solutions?
   - How to debug specific types of issues in this codebase?
   - What are common pitfalls when modifying this code?

4. Implementation Details:
   - How are core abstractions implemented?
   - What are the key algorithms or data structures used?
   - How does the error handling system work?

5. Testing Considerations:
   - How is testing typically done in this codebase?
   - What should be considered when writing tests?
   - Are there common test fixtures or utilities?

For each question, provide detailed, specific answers with concrete examples from the codebase when possible. Focus on information that would be most valuable to someone trying to fix bugs or implement new features. The FAQs should reflect the actual patterns and practices used in this specific repository, not generic software development advice.)PROMPT";

extern const char* const kRepoStructureBody = R"PROMPT(We are currently solving the following issue within our repository. Here is the issue text:
--- BEGIN ISSUE ---
{problem_statement}
--- END ISSUE ---

Below are some code segments, each from a relevant file. One or more of these files may contain bugs:
--- BEGIN FILE ---
{retrieval}
--- END FILE ---

To help you better understand the contexts of the code segments, we provide a set of dependencies of the code segments. 
The dependencies reflect how the functions/classes in the code segments are referenced in the codebase. 

--- BEGIN DEPENDENCIES ---
{dependencies}
--- END DEPENDENCIES ---

Please first localize the bug based on the issue statement, and then generate *SEARCH/REPLACE* edits to fix the issue.

Every *SEARCH/REPLACE* edit must use this format:
1. The file path
2. The start of search block: <<<<<<< SEARCH
3. A contiguous chunk of lines to search for in the existing source code
4. The dividing line: =======
5. The lines to replace into the source code
6. The end of the replace block: >>>>>>> REPLACE

Here is an example:

```python
### mathweb/flask/app.py
<<<<<<< SEARCH
from flask import Flask
=======
import math
from flask import Flask
>>>>>>> REPLACE
```

Please note that the *SEARCH/REPLACE* edit REQUIRES PROPER INDENTATION. If you would like to add the line '        print(x)', you must fully write that out, with all those spaces before the code!
Wrap the *SEARCH/REPLACE* edit in blocks ```python...```.)PROMPT";

extern const char* const kFewShotBody = R"PROMPT(Here are some {similar}example issues from the same repository along with the target file that were changed and final patch generated by an expert{successful}:
--- BEGIN EXAMPLES ---
{few_shot_examples}
--- END EXAMPLES ---

We are currently solving the following issue within our repository. Here is the issue text:
--- BEGIN ISSUE ---
{problem_statement}
--- END ISSUE ---

Below are some code segments, each from a relevant file. One or more of these files may contain bugs:
--- BEGIN FILE ---
{retrieval}
--- END FILE ---

Please first localize the bug based on the issue statement, and then generate *SEARCH/REPLACE* edits to fix the issue.

Every *SEARCH/REPLACE* edit must use this format:
1. The file path
2. The start of search block: <<<<<<< SEARCH
3. A contiguous chunk of lines to search for in the existing source code
4. The dividing line: =======
5. The lines to replace into the source code
6. The end of the replace block: >>>>>>> REPLACE

Here is an example:

```python
### mathweb/flask/app.py
<<<<<<< SEARCH
from flask import Flask
=======
import math
from flask import Flask
>>>>>>> REPLACE
```

Please note that the *SEARCH/REPLACE* edit REQUIRES PROPER INDENTATION. If you would like to add the line '        print(x)', you must fully write that out, with all those spaces before the code!
Wrap the *SEARCH/REPLACE* edit in blocks ```python...```.)PROMPT";

extern const char* const kPlanBody = R"PROMPT(We are currently solving the following issue within our repository. Here is the issue text:
--- BEGIN ISSUE ---
{problem_statement}
--- END ISSUE ---

Below are some code segments, each from a relevant file. One or more of these files may contain bugs:
--- BEGIN FILE ---
{retrieval}
--- END FILE ---

Please analyze the issue and provide a detailed plan to fix it. Do NOT generate any code patches or specific edits.

Your plan should include:

1. Bug localization: Identify which file(s) contain the bug based on the issue statement
2. Root cause analysis: Explain why the bug is occurring
3. Solution approach: Describe conceptually how to fix the issue
4. Implementation strategy: Outline the logical steps needed to implement the solution

Keep your analysis focused on the problem-solving approach rather than specific code changes.)PROMPT";

extern const char* const kInstanceQABody = R"PROMPT(We are currently solving the following issue within our repository. Here is the issue text:
--- BEGIN ISSUE ---
{problem_statement}
--- END ISSUE ---

Below are some code segments, each from a relevant file. One or more of these files may contain bugs:
--- BEGIN FILE ---
{retrieval}
--- END FILE ---

Please create a detailed FAQ (Frequently Asked Questions) document that would help a junior developer understand and fix this specific issue. Do NOT generate any code patches or specific edits.

Your FAQ should include 7-10 questions and answers about:

1. Issue Understanding:
   - What is the exact problem described in the issue?
   - What are the expected vs. actual behaviors?
   - What conditions trigger this issue?

2. Codebase Navigation:
   - Which specific files and functions are most relevant to this issue?
   - What are the key components involved in this functionality?
   - How do these components interact?

3. Technical Analysis:
   - What are the potential root causes of this issue?
   - What code patterns or anti-patterns might be contributing to the bug?
   - What specific edge cases might not be handled correctly?

4. Implementation Guidance:
   - What approaches could be used to fix this issue?
   - What implementation pitfalls should be avoided?
   - How should the solution be tested?

5. Codebase Specifics:
   - What patterns or conventions does this codebase use that are relevant to the fix?
   - What existing helper functions or utilities could be leveraged?
   - What dependencies or side effects need to be considered?

Make your questions and answers detailed, specific to this issue, and include concrete references to the code when possible. Avoid generic programming advice - focus on information that directly helps solve this specific issue.)PROMPT";

extern const char* const kPromptReductionBody = R"PROMPT(We are currently solving the following issue within our repository. Here is the issue text:
--- BEGIN ISSUE ---
{problem_statement}
--- END ISSUE ---

Below are some code segments, each from a relevant file. One or more of these files may contain bugs:
--- BEGIN FILE ---
{retrieval}
--- END FILE ---

Your task is to identify the most relevant code sections that contain the bug or need to be modified to fix the issue.
Please output only the file paths and relevant code sections in this format:

### <file_path>
```python
# relevant code section 1
```

### <file_path>
```python
# relevant code section 2
```

Only include the minimum necessary code with sufficient context to understand and fix the issue. Ensure that the code is complete and valid Python code.
Don't include any explanations or reasoning - just the file paths and code sections.)PROMPT";

extern const char* const kRouterBody = R"PROMPT(You are an expert software engineer tasked with analyzing software issues to determine the most efficient debugging approach.

Please analyze the following issue and codebase:

Issue description:
--- BEGIN ISSUE ---
{problem_statement}
--- END ISSUE ---

Relevant code:
--- BEGIN CODE ---
{retrieval}
--- END CODE ---

Your goal is to classify this issue as either SIMPLE or COMPLEX.

SIMPLE issues typically have these characteristics:
- Clear localization of the bug in the code
- Straightforward cause-effect relationship
- Relatively isolated impact (limited to one function or module)
- Common programming patterns or errors
- Solution likely follows established best practices

COMPLEX issues typically have these characteristics:
- Multiple components involved in the bug
- Subtle interactions between different parts of the codebase
- Requires deep reasoning about codebase architecture
- Edge cases that are difficult to identify
- May require creative or non-obvious solutions

Based solely on your analysis of the issue and code, respond with ONLY one of these two options:
- SIMPLE
- COMPLEX

Provide no explanation, reasoning, or additional text - just output the single classification word.)PROMPT";

extern const char* const kUniversalSCBody = R"PROMPT(I have generated the following {n_samples} potential solutions to fix this issue:

# Problem Statement
{problem_statement}

# Relevant Files
{formatted_files}

# Generated Solutions
{patches}

Based on the above solutions, select the most consistent and correct solution. Analyze the similarities and differences between the solutions, and select the one that best addresses the problem statement while making minimal and precise changes. 

Your selection should be based on:
1. Correctness (does it solve the issue described in the problem statement)
2. Consensus (do multiple solutions agree on a similar approach)
3. Simplicity (does it make minimal necessary changes)

Return your selection as "SELECTED_PATCH: X" where X is the number of the chosen patch (1 to {n_samples}) and then explain your reasoning.)PROMPT";

}  // namespace cascade::prompts::detail
