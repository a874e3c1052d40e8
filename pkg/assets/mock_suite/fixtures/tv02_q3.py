def answer_question(video, possible_answers):
    script = video.get_script()
    context = {"script": script}
    answer = video.choose_option("what did the team win?", context, possible_answers)
    return answer
