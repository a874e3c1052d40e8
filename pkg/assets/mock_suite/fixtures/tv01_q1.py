def answer_question(video, possible_answers):
    script = video.get_script()
    context = {"script": script}
    answer = video.choose_option("what did they talk about?", context, possible_answers)
    return answer
